"""Command line entry point: validate, simulate, mesh, serve.

Exit codes: 0 ok, 1 I/O or system failure, 2 validation failure, 64 usage.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import signal
import sys
from pathlib import Path

from .bots import RandomCarver, RiskAverse, SurfaceFollower, metrics_csv, run_bot_detailed, summary_json
from .catalog import ArtifactSpec, builtin_relic, builtin_relics, load_spec_file
from .errors import (
    DegenerateArtifactError,
    DigError,
    GridConfigError,
    PackageParseError,
    PackageValidationError,
)
from .mesher import ChunkMesher, mesh_artifact, write_obj

EX_OK = 0
EX_IO = 1
EX_INVALID = 2
EX_USAGE = 64

BUILTIN_NAMES = ("arhat", "gold_mask")

POLICIES = {
    "random-carver": RandomCarver,
    "surface-follower": SurfaceFollower,
    "risk-averse": RiskAverse,
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this tool reserves 2 for validation."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _load_package(ref: str) -> ArtifactSpec:
    if ref in BUILTIN_NAMES:
        return builtin_relic(ref)
    spec = load_spec_file(ref)
    spec.validate()
    return spec


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_validate(args) -> int:
    try:
        spec = _load_package(args.package)
    except OSError as exc:
        return _fail(EX_IO, str(exc))
    except (PackageParseError, PackageValidationError) as exc:
        if args.json:
            print(json.dumps({"valid": False, "error": str(exc)}, sort_keys=True))
        return _fail(EX_INVALID, str(exc))
    if args.json:
        print(json.dumps({"valid": True, "name": spec.name, "spec_hash": spec.spec_hash}, sort_keys=True))
    else:
        print(f"OK: {spec.name} (spec_hash {spec.spec_hash[:12]})")
    return EX_OK


def cmd_simulate(args) -> int:
    try:
        spec = _load_package(args.package)
    except OSError as exc:
        return _fail(EX_IO, str(exc))
    except (PackageParseError, PackageValidationError) as exc:
        return _fail(EX_INVALID, str(exc))

    fields = {"seed": args.seed, "strokes_per_s": args.strokes_per_s}
    if args.policy == "surface-follower":
        fields["stand_off"] = args.stand_off
    elif args.policy == "risk-averse":
        fields["sdf_margin"] = args.sdf_margin
    policy = POLICIES[args.policy](**fields)

    params = None
    if args.time_limit is not None:
        params = spec.session_params.merged({"time_limit_s": args.time_limit})

    try:
        run = run_bot_detailed(
            spec, policy, params=params, tool=args.tool, max_strokes=args.max_strokes
        )
    except DigError as exc:
        return _fail(EX_INVALID, str(exc))

    label = f"{args.policy}-seed{args.seed}"
    out_root = Path(args.out)
    run_dir = out_root / f"{spec.name}-{spec.spec_hash[:12]}-seed{args.seed}"
    try:
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "replay.jsonl").write_text(run.session.export_replay())
        (run_dir / "metrics.csv").write_text(metrics_csv([(label, run.metrics)]))
        (run_dir / "summary.json").write_text(summary_json([(label, run.metrics)]))
        earth = ChunkMesher(run.session.grid, closed_boundary=True).snapshot()
        write_obj(run_dir / "earth.obj", earth)
        write_obj(run_dir / "artifact.obj", run.session.artifact_mesh())
    except OSError as exc:
        return _fail(EX_IO, str(exc))

    if args.json:
        print(json.dumps({"run_dir": str(run_dir), **run.report.to_dict()}, sort_keys=True))
    else:
        r = run.report
        print(
            f"{spec.name}: {r.status} in {r.duration:.1f} s, {r.strokes} strokes, "
            f"{r.hits_taken} hits, exposure {r.exposure:.3f} -> {run_dir}"
        )
    return EX_OK


def cmd_mesh(args) -> int:
    try:
        spec = _load_package(args.package)
    except OSError as exc:
        return _fail(EX_IO, str(exc))
    except (PackageParseError, PackageValidationError) as exc:
        return _fail(EX_INVALID, str(exc))
    try:
        chunks = mesh_artifact(spec.geometry, spec.clod_edge, spec.cell_size)
    except (DegenerateArtifactError, GridConfigError) as exc:
        return _fail(EX_INVALID, str(exc))
    try:
        write_obj(args.out, chunks)
    except OSError as exc:
        return _fail(EX_IO, str(exc))
    triangles = sum(c.triangle_count for c in chunks)
    if args.json:
        print(json.dumps({"path": args.out, "triangles": triangles}, sort_keys=True))
    else:
        print(f"wrote {args.out} ({triangles} triangles)")
    return EX_OK


def _load_catalog(catalog_dir: str | None) -> list[ArtifactSpec]:
    specs = list(builtin_relics())
    if catalog_dir:
        for path in sorted(Path(catalog_dir).glob("*.json")):
            spec = load_spec_file(path)
            spec.validate()
            specs.append(spec)
    return specs


def cmd_serve(args) -> int:
    from .service import DigService, serve

    catalog_dir = args.catalog_dir or os.environ.get("DIG_CATALOG_DIR")
    try:
        catalog = _load_catalog(catalog_dir)
    except OSError as exc:
        return _fail(EX_IO, str(exc))
    except (PackageParseError, PackageValidationError) as exc:
        return _fail(EX_INVALID, str(exc))

    async def _run() -> None:
        service = DigService(catalog)
        server = await serve(service, args.host, args.port)
        stop = asyncio.Event()
        loop = asyncio.get_running_loop()
        for sig in (signal.SIGINT, signal.SIGTERM):
            loop.add_signal_handler(sig, stop.set)
        names = ", ".join(sorted(service.catalog))
        print(f"serving {names} on ws://{args.host}:{args.port}", flush=True)
        await stop.wait()
        server.close()
        await server.wait_closed()

    try:
        asyncio.run(_run())
    except OSError as exc:
        return _fail(EX_IO, str(exc))
    return EX_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="digsite", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an artifact package")
    p.add_argument("package", help="builtin relic name or package JSON path")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run a scripted bot session")
    p.add_argument("package")
    p.add_argument("--policy", choices=sorted(POLICIES), default="random-carver")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs", help="run directory root")
    p.add_argument("--tool", default=None)
    p.add_argument("--max-strokes", type=int, default=None)
    p.add_argument("--strokes-per-s", type=float, default=15.0)
    p.add_argument("--stand-off", type=float, default=0.0)
    p.add_argument("--sdf-margin", type=float, default=0.08)
    p.add_argument("--time-limit", type=float, default=None, help="session seconds override")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mesh", help="export the artifact mesh as OBJ")
    p.add_argument("package")
    p.add_argument("out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("serve", help="run the excavation service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--catalog-dir", default=None, help="extra package dir (or DIG_CATALOG_DIR)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
