"""Network front door: one session per connection, server-authoritative time.

Per-connection processing is a single logical sequence on the event loop:
read a frame, mutate the session, enqueue output. A writer task drains the
queue; mesh and state sends are enqueued as markers and coalesced there
(latest version per chunk, latest session state), so a slow client bounds
memory instead of growing it.
"""

from __future__ import annotations

import asyncio
import itertools
import time

from websockets.exceptions import ConnectionClosed

from .catalog import ArtifactSpec, builtin_relics
from .errors import PackageValidationError, ProtocolError, SessionError, UnknownToolError
from .geom import Pose
from .mesher import ChunkMesher
from .protocol import decode_frame, encode_frame, pack_mesh_chunk
from .session import Session, Status, Stroke

MAX_FRAME_BYTES = 1 << 20


class DigService:
    """Session manager + connection handler; pass .handler to a server."""

    def __init__(self, catalog=None, *, clock=time.monotonic, tick_interval: float = 0.25):
        if catalog is None:
            catalog = builtin_relics()
        self.catalog: dict[str, ArtifactSpec] = {spec.name: spec for spec in catalog}
        self.clock = clock
        self.tick_interval = tick_interval
        self.sessions: dict[str, Session] = {}
        self._ids = itertools.count(1)

    async def handler(self, websocket) -> None:
        conn = _Connection(self, websocket)
        await conn.run()


class _Connection:
    def __init__(self, service: DigService, websocket):
        self.service = service
        self.ws = websocket
        self.session: Session | None = None
        self.session_id: str | None = None
        self.mesher: ChunkMesher | None = None
        self.subscribed = False
        self.closing = False
        self.t0 = 0.0
        self.out: asyncio.Queue = asyncio.Queue()
        self.pending_mesh: dict[tuple[int, int, int], object] = {}
        self._mesh_pending = 0
        self._state_pending = 0

    # -- time ----------------------------------------------------------------

    def _now(self) -> float:
        return self.service.clock() - self.t0

    def _session_time(self) -> float:
        return self.session.clock if self.session is not None else 0.0

    # -- output helpers --------------------------------------------------------

    def _push(self, frame: dict) -> None:
        self.out.put_nowait(("frame", frame))

    def _push_error(self, code: str, message: str, *, close: bool = False) -> None:
        self._push({"type": "ERROR", "session_time": self._session_time(), "code": code, "message": message})
        if close:
            self.closing = True
            self.out.put_nowait(("close", 1002))

    def _push_mesh(self, chunks) -> None:
        if not self.subscribed or not chunks:
            return
        for chunk in chunks:
            self.pending_mesh[chunk.chunk_coord] = chunk
        self._mesh_pending += 1
        self.out.put_nowait(("mesh",))

    def _push_state(self) -> None:
        if self.session is None:
            return
        self._state_pending += 1
        self.out.put_nowait(("state",))

    def _push_events(self, events) -> None:
        for event in events:
            self._push({"type": "EVENT", "session_time": event.t, "event": event.to_dict()})

    def _state_frame(self) -> dict:
        s = self.session
        return {
            "type": "STATE",
            "session_time": s.clock,
            "health": s.health,
            "max_health": s.params.max_health,
            "clock_remaining": max(0.0, s.params.time_limit - s.clock),
            "exposure": s.exposure,
            "status": s.status.value,
            "active_tool": s.active_tool,
        }

    # -- frame handling ----------------------------------------------------------

    def _handle(self, raw) -> None:
        if self.closing:
            return
        try:
            frame = decode_frame(raw)
        except ProtocolError as exc:
            self._push_error("BAD_FRAME", str(exc), close=True)
            return
        kind = frame["type"]
        if kind == "PING":
            self._push({"type": "PONG", "session_time": self._session_time(), "t": frame["t"]})
        elif kind == "CREATE_SESSION":
            self._create_session(frame)
        elif kind == "APPLY_STROKE":
            self._apply_stroke(frame)
        elif kind == "SELECT_TOOL":
            self._select_tool(frame)
        elif kind == "SUBSCRIBE_MESH":
            self._subscribe()
        else:
            # a well-formed server frame arriving at the server is still misuse
            self._push_error("BAD_FRAME", f"unexpected frame type {kind!r}", close=True)

    def _create_session(self, frame: dict) -> None:
        if self.session is not None:
            self._push_error("SESSION_EXISTS", "this connection already has a session")
            return
        name = frame["relic_name"]
        spec = self.service.catalog.get(name)
        if spec is None:
            self._push_error("UNKNOWN_RELIC", f"no relic named {name!r}")
            return
        params = spec.session_params
        overrides = frame.get("params")
        if overrides is not None:
            try:
                params = params.merged(overrides)
            except (PackageValidationError, TypeError) as exc:
                self._push_error("BAD_PARAMS", str(exc))
                return
        session = Session.start(spec, seed=0, params=params)
        self.session = session
        self.mesher = ChunkMesher(session.grid, closed_boundary=True)
        self.session_id = f"s{next(self.service._ids):04d}"
        self.service.sessions[self.session_id] = session
        self.t0 = self.service.clock()
        self._push(
            {
                "type": "SESSION_CREATED",
                "session_time": 0.0,
                "session_id": self.session_id,
                "artifact_mesh": [pack_mesh_chunk(c) for c in session.artifact_mesh()],
                "grid_params": {
                    "dims": list(session.grid.dims),
                    "cell_size": session.grid.cell_size,
                    "origin": [float(v) for v in session.grid.origin],
                    "chunk_size": session.grid.chunk_size,
                    "clod_edge": spec.clod_edge,
                },
                "tools": [tool.to_dict() for tool in spec.tools],
                "session_params": params.to_dict(),
            }
        )
        self._push_state()

    def _apply_stroke(self, frame: dict) -> None:
        if self.session is None:
            self._push_error("NO_SESSION", "create a session first")
            return
        stroke = frame["stroke"]
        if not isinstance(stroke, dict) or "pose" not in stroke:
            self._push_error("BAD_FRAME", "stroke needs a pose", close=True)
            return
        try:
            pose = Pose.from_dict(stroke["pose"])
        except (KeyError, TypeError, ValueError):
            self._push_error("BAD_FRAME", "malformed pose", close=True)
            return
        # server-authoritative time; the client's stroke.t is advisory only
        t = max(self._now(), self.session.clock)
        try:
            events = self.session.apply_stroke(Stroke(t, pose))
        except SessionError as exc:
            self._push_error("SESSION_OVER", str(exc))
            return
        self._push_events(events)
        if self.mesher is not None:
            self._push_mesh(self.mesher.remesh_dirty())
        self._push_state()

    def _select_tool(self, frame: dict) -> None:
        if self.session is None:
            self._push_error("NO_SESSION", "create a session first")
            return
        try:
            self.session.select_tool(frame["name"])
        except UnknownToolError as exc:
            self._push_error("UNKNOWN_TOOL", str(exc))
            return
        except SessionError as exc:
            self._push_error("SESSION_OVER", str(exc))
            return
        self._push_state()

    def _subscribe(self) -> None:
        if self.session is None:
            self._push_error("NO_SESSION", "create a session first")
            return
        self.subscribed = True
        self._push_mesh(self.mesher.snapshot())
        self._push_state()

    # -- tasks ------------------------------------------------------------------

    async def _ticker(self) -> None:
        while True:
            await asyncio.sleep(self.service.tick_interval)
            session = self.session
            if session is None or session.status is not Status.RUNNING or self.closing:
                continue
            now = self._now()
            if now <= session.clock:
                continue
            events = session.tick(now)
            if events:
                self._push_events(events)
                self._push_state()

    async def _writer(self) -> None:
        try:
            await self._drain()
        except ConnectionClosed:
            return

    async def _drain(self) -> None:
        while True:
            item = await self.out.get()
            tag = item[0]
            if tag == "frame":
                await self.ws.send(encode_frame(item[1]))
            elif tag == "mesh":
                self._mesh_pending -= 1
                if self._mesh_pending > 0 or not self.pending_mesh:
                    continue
                chunks = [self.pending_mesh[c] for c in sorted(self.pending_mesh)]
                self.pending_mesh = {}
                frame = {
                    "type": "MESH_DELTA",
                    "session_time": self._session_time(),
                    "chunks": [pack_mesh_chunk(c) for c in chunks],
                }
                await self.ws.send(encode_frame(frame))
            elif tag == "state":
                self._state_pending -= 1
                if self._state_pending > 0:
                    continue
                await self.ws.send(encode_frame(self._state_frame()))
            elif tag == "close":
                await self.ws.close(item[1])
                return

    async def run(self) -> None:
        writer = asyncio.create_task(self._writer())
        ticker = asyncio.create_task(self._ticker())
        try:
            async for raw in self.ws:
                self._handle(raw)
        except ConnectionClosed:
            pass
        finally:
            writer.cancel()
            ticker.cancel()
            if self.session_id is not None:
                self.service.sessions.pop(self.session_id, None)


async def serve(service: DigService, host: str = "127.0.0.1", port: int = 8765, **kwargs):
    """Bind and return the running server (use async with or .close())."""
    from websockets.asyncio.server import serve as ws_serve

    return await ws_serve(service.handler, host, port, max_size=MAX_FRAME_BYTES, **kwargs)
