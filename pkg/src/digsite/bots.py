"""Scripted excavators that play sessions headlessly.

RandomCarver and SurfaceFollower act only on player-visible state (the
current carved mesh). RiskAverse reads the true artifact SDF; it exists
as an oracle for the claim that careful play takes zero hits, not as a
fair player model. Runs are fully deterministic given (spec, policy, seed).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .catalog import ArtifactSpec, SessionParams
from .errors import SessionError
from .geom import Pose, normalize_quat, quat_from_z_to, quat_mul, random_unit_quat
from .mesher import ChunkMesher
from .session import Session, Status, Stroke, SessionReport
from .voxel import Brush, BrushShape, VoxelGrid


# half-turn-free rotations putting brush-local axis 0/1/2 on the z line
_AXIS_TO_Z = (
    np.array([np.cos(np.pi / 4), 0.0, np.sin(np.pi / 4), 0.0]),
    np.array([np.cos(np.pi / 4), np.sin(np.pi / 4), 0.0, 0.0]),
    np.array([1.0, 0.0, 0.0, 0.0]),
)


def _dig_orientation(brush: Brush, direction: np.ndarray) -> np.ndarray:
    """Point the brush's longest half-extent along `direction` (boxes only)."""
    if brush.shape == BrushShape.SPHERE:
        return quat_from_z_to(direction)
    axis = int(np.argmax(brush.half_extents))
    return normalize_quat(quat_mul(quat_from_z_to(direction), _AXIS_TO_Z[axis]))


@dataclass(frozen=True)
class RandomCarver:
    """Uniform random pose over the clod volume each stroke."""

    variant = "RANDOM_CARVER"
    strokes_per_s: float = 15.0
    seed: int = 0

    def validate(self) -> None:
        if self.strokes_per_s <= 0:
            raise ValueError("strokes_per_s must be > 0")

    def prepare(self, session: Session, rng: np.random.Generator):
        origin = session.grid.origin
        edge = session.spec.clod_edge

        def plan():
            pos = origin + rng.uniform(0.0, edge, 3)
            return Pose(tuple(pos), random_unit_quat(rng))

        return plan


@dataclass(frozen=True)
class SurfaceFollower:
    """Greedy digger: strokes at the earth-mesh vertex nearest the clod center.

    The bundled relics sit centered in their clods, so distance to the clod
    center is the player-computable stand-in for distance to the artifact.
    stand_off backs the brush off along the surface normal.
    """

    variant = "SURFACE_FOLLOWER"
    stand_off: float = 0.0
    strokes_per_s: float = 15.0
    seed: int = 0

    def validate(self) -> None:
        if self.strokes_per_s <= 0:
            raise ValueError("strokes_per_s must be > 0")
        if self.stand_off < 0:
            raise ValueError("stand_off must be >= 0")

    def prepare(self, session: Session, rng: np.random.Generator):
        mesher = ChunkMesher(session.grid, closed_boundary=True)
        center = session.grid.origin + 0.5 * session.spec.clod_edge
        cache: dict[tuple[int, int, int], tuple[np.ndarray, np.ndarray]] = {}

        def plan():
            for chunk in mesher.remesh_dirty():
                if chunk.triangle_count:
                    cache[chunk.chunk_coord] = (chunk.vertices, chunk.normals)
                else:
                    cache.pop(chunk.chunk_coord, None)
            best = None
            for key in sorted(cache):
                verts, normals = cache[key]
                d2 = ((verts - center) ** 2).sum(axis=1)
                i = int(np.argmin(d2))
                if best is None or d2[i] < best[0]:
                    best = (float(d2[i]), verts[i], normals[i])
            if best is None:
                return None
            pos = best[1] + best[2] * self.stand_off
            return Pose(tuple(pos), _dig_orientation(session.active_brush, best[2]))

        return plan


@dataclass(frozen=True)
class RiskAverse:
    """Oracle bot: carves nearest-to-artifact earth first, never takes a hit.

    Targets earth cells in ascending true-SDF order. Each stroke pose backs
    the brush off along the outward SDF gradient, then is accepted only if
    the support covers the target cell center and contains no artifact cell
    center (the exact condition carve() uses to score a hit). Unsafe targets
    are skipped; wide brushes usually empty them collaterally anyway.
    """

    variant = "RISK_AVERSE"
    sdf_margin: float = 0.08
    strokes_per_s: float = 15.0
    seed: int = 0

    def validate(self) -> None:
        if self.strokes_per_s <= 0:
            raise ValueError("strokes_per_s must be > 0")
        if self.sdf_margin < 0:
            raise ValueError("sdf_margin must be >= 0")

    def prepare(self, session: Session, rng: np.random.Generator):
        grid = session.grid
        geometry = session.spec.geometry
        flat_sdf = grid.sdf_cells.ravel()
        candidates = np.flatnonzero(~grid.artifact.ravel())
        order = candidates[np.argsort(flat_sdf[candidates], kind="stable")]
        state = {"i": 0}
        eps = 0.5 * grid.cell_size

        def outward(x: np.ndarray) -> np.ndarray:
            probes = np.repeat(x[None, :], 6, axis=0)
            for a in range(3):
                probes[2 * a, a] += eps
                probes[2 * a + 1, a] -= eps
            vals = geometry.evaluate(probes)
            g = np.array([vals[0] - vals[1], vals[2] - vals[3], vals[4] - vals[5]])
            norm = float(np.linalg.norm(g))
            return g / norm if norm > 1e-12 else np.array([0.0, 0.0, 1.0])

        def pose_for(cell: tuple[int, int, int], brush: Brush) -> Pose | None:
            x = grid.cell_center(cell)
            g = outward(x)
            if brush.shape == BrushShape.SPHERE:
                depth = brush.radius
            else:
                depth = brush.half_extents[2]
            reach = max(depth - 0.55 * grid.cell_size, 0.0)
            delta0 = min(max(self.sdf_margin - float(flat_sdf[np.ravel_multi_index(cell, grid.dims)]), 0.0), reach)
            for delta in (delta0, 0.5 * delta0, 0.0):
                pose = Pose(tuple(x + g * delta), quat_from_z_to(g))
                if grid.brush_overlaps_artifact(brush, pose):
                    continue
                if _covers_cell(grid, brush, pose, cell):
                    return pose
            return None

        def plan():
            dens = grid.density.ravel()
            while state["i"] < len(order):
                j = int(order[state["i"]])
                if dens[j] < 0.5:
                    state["i"] += 1
                    continue
                cell = tuple(int(v) for v in np.unravel_index(j, grid.dims))
                pose = pose_for(cell, session.active_brush)
                if pose is None:
                    state["i"] += 1
                    continue
                return pose
            return None

        return plan


def _covers_cell(grid: VoxelGrid, brush: Brush, pose: Pose, cell) -> bool:
    block = grid._support_block(brush, pose)
    if block is None:
        return False
    slices, inside, _ = block
    loc = []
    for a in range(3):
        s = slices[a]
        if not s.start <= cell[a] < s.stop:
            return False
        loc.append(cell[a] - s.start)
    return bool(inside[tuple(loc)])


@dataclass
class RunMetrics:
    completion: bool
    duration: float
    hits: int
    strokes: int
    exposure_curve: list[tuple[float, float]]
    removed_volume: float

    @property
    def exposure(self) -> float:
        return self.exposure_curve[-1][1]

    def to_dict(self) -> dict:
        return {
            "completion": self.completion,
            "duration_s": self.duration,
            "hits": self.hits,
            "strokes": self.strokes,
            "removed_volume_m3": self.removed_volume,
            "exposure": self.exposure,
            "exposure_curve": [[t, e] for t, e in self.exposure_curve],
        }


@dataclass
class BotRun:
    session: Session
    report: SessionReport
    metrics: RunMetrics


def run_bot_detailed(
    spec: ArtifactSpec,
    policy,
    *,
    params: SessionParams | None = None,
    tool: str | None = None,
    max_strokes: int | None = None,
    seed: int | None = None,
) -> BotRun:
    """Play one full session under the policy; the session is returned live."""
    policy.validate()
    use_seed = policy.seed if seed is None else int(seed)
    session = Session.start(spec, seed=use_seed, params=params)
    if tool is not None:
        session.select_tool(tool)
    rng = np.random.default_rng(use_seed)
    plan = policy.prepare(session, rng)
    dt = 1.0 / policy.strokes_per_s
    curve = [(0.0, session.exposure)]
    k = 0
    while session.status is Status.RUNNING:
        if max_strokes is not None and session.stroke_count >= max_strokes:
            break
        pose = plan()
        if pose is None:
            break
        k += 1
        session.apply_stroke(Stroke(k * dt, pose))
        point = (session.clock, session.exposure)
        if point[1] != curve[-1][1]:
            curve.append(point)
    if session.status is Status.RUNNING:
        session.tick(session.params.time_limit)
    if curve[-1] != (session.clock, session.exposure):
        curve.append((session.clock, session.exposure))
    report = session.final_report()
    metrics = RunMetrics(
        completion=report.status == Status.COMPLETED.value,
        duration=report.duration,
        hits=report.hits_taken,
        strokes=report.strokes,
        exposure_curve=curve,
        removed_volume=report.removed_volume,
    )
    return BotRun(session, report, metrics)


def run_bot(
    spec: ArtifactSpec,
    policy,
    *,
    params: SessionParams | None = None,
    tool: str | None = None,
    max_strokes: int | None = None,
    seed: int | None = None,
) -> tuple[SessionReport, RunMetrics]:
    run = run_bot_detailed(
        spec, policy, params=params, tool=tool, max_strokes=max_strokes, seed=seed
    )
    return run.report, run.metrics


def compare_tools(
    spec: ArtifactSpec,
    policy,
    tool_names,
    *,
    params: SessionParams | None = None,
    max_strokes: int | None = None,
) -> dict[str, RunMetrics]:
    """One run per tool at the same seed; the tool is locked for the run."""
    known = {t.name for t in spec.tools}
    for name in tool_names:
        if name not in known:
            raise SessionError(f"unknown tool {name!r}")
    rows: dict[str, RunMetrics] = {}
    for name in tool_names:
        _, metrics = run_bot(spec, policy, params=params, tool=name, max_strokes=max_strokes)
        rows[name] = metrics
    return rows


METRICS_COLUMNS = ("run", "completion", "duration_s", "hits", "strokes", "removed_volume_m3", "exposure")


def metrics_csv(rows: list[tuple[str, RunMetrics]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRICS_COLUMNS)
    for label, m in rows:
        writer.writerow(
            [label, m.completion, f"{m.duration:.6g}", m.hits, m.strokes, f"{m.removed_volume:.9g}", f"{m.exposure:.6g}"]
        )
    return buf.getvalue()


def summary_json(rows: list[tuple[str, RunMetrics]]) -> str:
    per_run = {label: m.to_dict() for label, m in rows}
    doc = {
        "runs": len(rows),
        "completed": sum(1 for _, m in rows if m.completion),
        "total_hits": sum(m.hits for _, m in rows),
        "total_strokes": sum(m.strokes for _, m in rows),
        "mean_duration_s": (sum(m.duration for _, m in rows) / len(rows)) if rows else 0.0,
        "per_run": per_run,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
