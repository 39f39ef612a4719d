"""Headless voxel excavation engine: carve a clod of earth, expose the relic inside."""

from .catalog import (
    ArtifactSpec,
    DialogPayload,
    SessionParams,
    Tool,
    TriggerPoint,
    builtin_relic,
    builtin_relics,
    load_spec,
    load_spec_file,
)
from .errors import (
    DegenerateArtifactError,
    DigError,
    GridConfigError,
    PackageParseError,
    PackageValidationError,
    ProtocolError,
    ReplayError,
    SessionError,
    UnknownToolError,
)
from .geom import Pose
from .mesher import ChunkMesher, MeshChunk, mesh_artifact, write_obj
from .sdf import Box, Capsule, SdfNode, Sphere, Translate, ScaleUniform, Union
from .session import Event, Session, SessionReport, Status, Stroke, replay, replay_session
from .voxel import Brush, BrushShape, CarveResult, Falloff, VoxelGrid, exposure_fraction, init_grid

__version__ = "0.1.0"

__all__ = [
    "ArtifactSpec",
    "Box",
    "Brush",
    "BrushShape",
    "Capsule",
    "CarveResult",
    "ChunkMesher",
    "DegenerateArtifactError",
    "DialogPayload",
    "DigError",
    "Event",
    "Falloff",
    "GridConfigError",
    "MeshChunk",
    "PackageParseError",
    "PackageValidationError",
    "Pose",
    "ProtocolError",
    "ReplayError",
    "ScaleUniform",
    "SdfNode",
    "Session",
    "SessionError",
    "SessionParams",
    "SessionReport",
    "Sphere",
    "Status",
    "Stroke",
    "Tool",
    "Translate",
    "TriggerPoint",
    "Union",
    "UnknownToolError",
    "VoxelGrid",
    "builtin_relic",
    "builtin_relics",
    "exposure_fraction",
    "init_grid",
    "load_spec",
    "load_spec_file",
    "mesh_artifact",
    "replay",
    "replay_session",
    "write_obj",
]
