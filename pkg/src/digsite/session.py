"""One excavation session: clock, health, trigger reveals, completion, replay.

Events and the replay log serialize through canonical JSON (sorted keys, no
whitespace), so identical runs produce byte-identical documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .catalog import ArtifactSpec, SessionParams
from .errors import DegenerateArtifactError, ReplayError, SessionError, UnknownToolError
from .geom import Pose
from .mesher import MeshChunk, mesh_artifact
from .voxel import VoxelGrid, init_grid

REPLAY_FORMAT_VERSION = 1


class Status(str, Enum):
    RUNNING = "RUNNING"
    COMPLETED = "COMPLETED"
    TIME_UP = "TIME_UP"


STROKE_APPLIED = "STROKE_APPLIED"
HIT = "HIT"
TRIGGER_REVEALED = "TRIGGER_REVEALED"
EXPOSURE_MILESTONE = "EXPOSURE_MILESTONE"
COMPLETED = "COMPLETED"
TIME_UP = "TIME_UP"

TERMINAL_EVENTS = (COMPLETED, TIME_UP)


@dataclass(frozen=True)
class Stroke:
    t: float
    pose: Pose


@dataclass(frozen=True)
class Event:
    kind: str
    t: float
    data: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind, "t": self.t, "data": self.data}


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class SessionReport:
    status: str
    duration: float
    hits_taken: int
    health: int
    exposure: float
    strokes: int
    triggers_revealed: int
    removed_volume: float

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "duration": self.duration,
            "hits_taken": self.hits_taken,
            "health": self.health,
            "exposure": self.exposure,
            "strokes": self.strokes,
            "triggers_revealed": self.triggers_revealed,
            "removed_volume": self.removed_volume,
        }


class Session:
    """Construct via Session.start(spec, seed); all mutations are serialized."""

    def __init__(self, spec: ArtifactSpec, seed: int, params: SessionParams, grid: VoxelGrid):
        self.spec = spec
        self.seed = int(seed)
        self.params = params
        self.grid = grid
        self.status = Status.RUNNING
        self.clock = 0.0
        self.health = params.max_health
        self.active_tool = spec.tools[0].name
        self.stroke_count = 0
        self.hits_taken = 0
        self.last_hit_time: float | None = None
        self.revealed_trigger_ids: list[str] = []
        self.events: list[Event] = []
        self._inputs: list[dict] = []
        self._tools = {t.name: t.brush for t in spec.tools}
        self._milestone = 0
        self._artifact_mesh: list[MeshChunk] | None = None
        self._trigger_cells: dict[tuple[int, int, int], list] = {}
        for trig in spec.triggers:
            cell = grid.cell_of_point(trig.position)
            if cell is None:
                raise SessionError(f"trigger {trig.id} lies outside the grid")
            self._trigger_cells.setdefault(cell, []).append(trig)

    @classmethod
    def start(cls, spec: ArtifactSpec, seed: int = 0, params: SessionParams | None = None) -> "Session":
        """Fresh session; the seed feeds no engine randomness but is logged."""
        if params is None:
            params = spec.session_params
        params.validate()
        grid = init_grid(spec.clod_edge, spec.cell_size, spec.geometry)
        if grid.surface_total == 0:
            raise DegenerateArtifactError("artifact has no surface cells on this grid")
        return cls(spec, seed, params, grid)

    # -- queries -----------------------------------------------------------

    @property
    def exposure(self) -> float:
        return self.grid.exposed_count / self.grid.surface_total

    @property
    def active_brush(self):
        return self._tools[self.active_tool]

    def artifact_mesh(self) -> list[MeshChunk]:
        """Static relic mesh, extracted on first use."""
        if self._artifact_mesh is None:
            self._artifact_mesh = mesh_artifact(
                self.spec.geometry,
                self.spec.clod_edge,
                self.spec.cell_size,
                origin=self.grid.origin,
                samples=self.grid.sdf_cells,
            )
        return self._artifact_mesh

    def _stats(self) -> dict:
        return {
            "status": self.status.value,
            "duration": self.clock,
            "hits_taken": self.hits_taken,
            "health": self.health,
            "exposure": self.exposure,
            "strokes": self.stroke_count,
            "triggers_revealed": len(self.revealed_trigger_ids),
            "removed_volume": self.grid.removed_total(),
        }

    def final_report(self) -> SessionReport:
        if self.status is Status.RUNNING:
            raise SessionError("session still running")
        return SessionReport(**self._stats())

    # -- mutations ----------------------------------------------------------

    def _emit(self, kind: str, data: dict) -> Event:
        event = Event(kind, self.clock, data)
        self.events.append(event)
        return event

    def _time_up(self) -> list[Event]:
        self.clock = self.params.time_limit
        self.status = Status.TIME_UP
        return [self._emit(TIME_UP, {"stats": self._stats()})]

    def tick(self, now: float) -> list[Event]:
        """Advance the clock without carving; absorbs silently once terminal."""
        if self.status is not Status.RUNNING:
            return []
        now = float(now)
        if now < self.clock:
            raise SessionError("tick time precedes session clock")
        self._inputs.append({"t": now, "kind": "tick", "payload": {}})
        if now >= self.params.time_limit:
            return self._time_up()
        self.clock = now
        return []

    def select_tool(self, tool_name: str) -> None:
        if self.status is not Status.RUNNING:
            raise SessionError("session is over")
        if tool_name not in self._tools:
            raise UnknownToolError(f"unknown tool {tool_name!r}")
        self._inputs.append({"t": self.clock, "kind": "select_tool", "payload": {"name": tool_name}})
        self.active_tool = tool_name

    def apply_stroke(self, stroke: Stroke) -> list[Event]:
        if self.status is not Status.RUNNING:
            raise SessionError("session is over")
        t = float(stroke.t)
        if t < self.clock:
            raise SessionError("stroke timestamp precedes session clock")
        self._inputs.append({"t": t, "kind": "stroke", "payload": stroke.pose.to_dict()})
        if t >= self.params.time_limit:
            # limit crossed: the stroke is discarded, the session ends
            return self._time_up()
        self.clock = t

        result = self.grid.carve(self._tools[self.active_tool], stroke.pose)
        self.stroke_count += 1
        events = [
            self._emit(
                STROKE_APPLIED,
                {"tool": self.active_tool, "stroke_index": self.stroke_count, **result.summary()},
            )
        ]

        if result.artifact_contact and (
            self.last_hit_time is None or t - self.last_hit_time >= self.params.hit_cooldown
        ):
            self.health = max(0, self.health - self.params.hit_penalty)
            self.hits_taken += 1
            self.last_hit_time = t
            events.append(
                self._emit(HIT, {"contact_point": list(result.contact_point), "health_after": self.health})
            )

        for cell in map(tuple, result.emptied_cells):
            for trig in self._trigger_cells.get(cell, ()):
                if trig.id not in self.revealed_trigger_ids:
                    self.revealed_trigger_ids.append(trig.id)
                    events.append(
                        self._emit(
                            TRIGGER_REVEALED,
                            {"trigger_id": trig.id, "dialog": trig.dialog.to_dict()},
                        )
                    )

        count, total = self.grid.exposed_count, self.grid.surface_total
        decile = (10 * count) // total
        for d in range(self._milestone + 1, decile + 1):
            events.append(self._emit(EXPOSURE_MILESTONE, {"decile": d, "exposure": count / total}))
        self._milestone = max(self._milestone, decile)

        if count / total >= self.params.completion_exposure:
            self.status = Status.COMPLETED
            events.append(
                self._emit(
                    COMPLETED,
                    {"dialog": self.spec.completion_dialog.to_dict(), "stats": self._stats()},
                )
            )
        return events

    # -- replay --------------------------------------------------------------

    def serialized_events(self) -> str:
        return "\n".join(_canonical(e.to_dict()) for e in self.events)

    def export_replay(self) -> str:
        header = {
            "format_version": REPLAY_FORMAT_VERSION,
            "spec_hash": self.spec.spec_hash,
            "seed": self.seed,
            "params": self.params.to_dict(),
        }
        lines = [_canonical(header)]
        lines.extend(_canonical(rec) for rec in self._inputs)
        return "\n".join(lines) + "\n"


def replay_session(document: str, spec: ArtifactSpec) -> Session:
    """Re-run a replay document against the spec; returns the finished session."""
    lines = [line for line in document.splitlines() if line.strip()]
    if not lines:
        raise ReplayError("empty replay document")
    try:
        header = json.loads(lines[0])
        records = [json.loads(line) for line in lines[1:]]
    except json.JSONDecodeError as exc:
        raise ReplayError(f"malformed replay line: {exc.msg}") from None
    if not isinstance(header, dict) or header.get("format_version") != REPLAY_FORMAT_VERSION:
        raise ReplayError("unsupported replay format")
    if header.get("spec_hash") != spec.spec_hash:
        raise ReplayError("replay spec_hash does not match the provided spec")
    params = SessionParams.from_dict(header.get("params", {}), "params")
    session = Session.start(spec, seed=header.get("seed", 0), params=params)
    for rec in records:
        kind = rec.get("kind")
        t = rec.get("t")
        payload = rec.get("payload", {})
        if kind == "stroke":
            session.apply_stroke(Stroke(t, Pose.from_dict(payload)))
        elif kind == "tick":
            session.tick(t)
        elif kind == "select_tool":
            session.select_tool(payload["name"])
        else:
            raise ReplayError(f"unknown input kind {kind!r}")
    return session


def replay(document: str, spec: ArtifactSpec) -> SessionReport:
    return replay_session(document, spec).final_report()
