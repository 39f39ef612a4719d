"""Wire protocol: one JSON text frame per message.

Every frame carries a `type` discriminator and a `session_time` field.
Mesh payloads ship as base64 little-endian 32-bit floats (vertices,
normals) and 32-bit unsigned ints (indices) to bound frame size; decode
of any encode is the identity on those arrays.
"""

from __future__ import annotations

import base64
import json

import numpy as np

from .errors import ProtocolError
from .mesher import MeshChunk

CLIENT_FRAMES = {
    "CREATE_SESSION": {"relic_name"},
    "APPLY_STROKE": {"stroke"},
    "SELECT_TOOL": {"name"},
    "SUBSCRIBE_MESH": set(),
    "PING": {"t"},
}

SERVER_FRAMES = {
    "SESSION_CREATED": {"session_id", "artifact_mesh", "grid_params", "tools", "session_params"},
    "MESH_DELTA": {"chunks"},
    "EVENT": {"event"},
    "STATE": {"health", "clock_remaining", "exposure"},
    "ERROR": {"code", "message"},
    "PONG": {"t"},
}

FRAME_TYPES = {**CLIENT_FRAMES, **SERVER_FRAMES}


def encode_frame(frame: dict) -> str:
    if "type" not in frame or "session_time" not in frame:
        raise ProtocolError("frame needs type and session_time")
    return json.dumps(frame, sort_keys=True, separators=(",", ":"))


def decode_frame(text) -> dict:
    try:
        frame = json.loads(text)
    except (json.JSONDecodeError, TypeError, ValueError):
        raise ProtocolError("frame is not valid JSON") from None
    if not isinstance(frame, dict):
        raise ProtocolError("frame must be a JSON object")
    kind = frame.get("type")
    if kind not in FRAME_TYPES:
        raise ProtocolError(f"unknown frame type {kind!r}")
    if not isinstance(frame.get("session_time"), (int, float)):
        raise ProtocolError("frame needs a numeric session_time")
    missing = FRAME_TYPES[kind] - frame.keys()
    if missing:
        raise ProtocolError(f"{kind} frame missing {sorted(missing)}")
    return frame


def _b64(arr: np.ndarray, dtype: str) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype=dtype).tobytes()).decode("ascii")


def _unb64(data, dtype: str, name: str) -> np.ndarray:
    if not isinstance(data, str):
        raise ProtocolError(f"{name} must be a base64 string")
    try:
        raw = base64.b64decode(data, validate=True)
    except Exception:
        raise ProtocolError(f"{name} is not valid base64") from None
    try:
        return np.frombuffer(raw, dtype=dtype)
    except ValueError:
        raise ProtocolError(f"{name} byte length is not a whole number of elements") from None


def pack_mesh_chunk(chunk: MeshChunk) -> dict:
    return {
        "chunk": list(chunk.chunk_coord),
        "version": chunk.version,
        "vertex_count": int(len(chunk.vertices)),
        "triangle_count": int(chunk.triangle_count),
        "vertices": _b64(chunk.vertices, "<f4"),
        "normals": _b64(chunk.normals, "<f4"),
        "indices": _b64(chunk.indices, "<u4"),
    }


def unpack_mesh_chunk(data: dict) -> MeshChunk:
    if not isinstance(data, dict):
        raise ProtocolError("mesh chunk must be an object")
    missing = {"chunk", "version", "vertex_count", "triangle_count", "vertices", "normals", "indices"} - data.keys()
    if missing:
        raise ProtocolError(f"mesh chunk missing {sorted(missing)}")
    coord = data["chunk"]
    if not isinstance(coord, list) or len(coord) != 3:
        raise ProtocolError("mesh chunk coord must be [cx, cy, cz]")
    nv, nt = int(data["vertex_count"]), int(data["triangle_count"])
    vertices = _unb64(data["vertices"], "<f4", "vertices")
    normals = _unb64(data["normals"], "<f4", "normals")
    indices = _unb64(data["indices"], "<u4", "indices")
    if len(vertices) != 3 * nv or len(normals) != 3 * nv or len(indices) != 3 * nt:
        raise ProtocolError("mesh chunk array lengths disagree with counts")
    return MeshChunk(
        tuple(int(c) for c in coord),
        int(data["version"]),
        vertices.reshape(nv, 3),
        normals.reshape(nv, 3),
        indices.reshape(nt, 3).astype(np.int32),
    )
