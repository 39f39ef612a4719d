"""Relic packages: geometry, trigger points, dialogs, tools, session parameters.

A package is one JSON document (see load_spec) validated strictly: unknown keys
are rejected and trigger placement is checked against the relic SDF.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import sdf as sdf_tree
from .errors import PackageParseError, PackageValidationError
from .sdf import Box, Capsule, SdfNode, Sphere, Union, _check_keys
from .voxel import Brush, BrushShape, Falloff, MAX_CELLS_PER_AXIS

DEFAULT_REVEAL_MARGIN = 0.06
DEFAULT_TRIGGER_COUNT = 3


@dataclass(frozen=True)
class DialogPayload:
    title: str
    body: str
    audio_ref: str | None = None

    def to_dict(self) -> dict:
        out = {"title": self.title, "body": self.body}
        if self.audio_ref is not None:
            out["audio_ref"] = self.audio_ref
        return out

    @classmethod
    def from_dict(cls, data: dict, path: str) -> "DialogPayload":
        _check_keys(data, path, {"title", "body"}, {"audio_ref"})
        title, body = data["title"], data["body"]
        if not isinstance(title, str) or not isinstance(body, str) or not body:
            raise PackageValidationError(f"{path}: title/body must be strings, body non-empty")
        audio = data.get("audio_ref")
        if audio is not None and not isinstance(audio, str):
            raise PackageValidationError(f"{path}: audio_ref must be a string")
        return cls(title, body, audio)


@dataclass
class TriggerPoint:
    """Invisible reveal point near the relic surface; revealed is session state."""

    id: str
    position: tuple[float, float, float]
    dialog: DialogPayload
    revealed: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "position": [float(v) for v in self.position],
            "dialog": self.dialog.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict, path: str) -> "TriggerPoint":
        _check_keys(data, path, {"id", "position", "dialog"})
        tid = data["id"]
        if not isinstance(tid, str) or not tid:
            raise PackageValidationError(f"{path}: id must be a non-empty string")
        pos = data["position"]
        if not isinstance(pos, list) or len(pos) != 3:
            raise PackageValidationError(f"{path}: position must be [x, y, z]")
        return cls(tid, tuple(float(v) for v in pos), DialogPayload.from_dict(data["dialog"], f"{path}.dialog"))


@dataclass(frozen=True)
class SessionParams:
    time_limit: float = 420.0
    max_health: int = 40
    hit_penalty: int = 1
    completion_exposure: float = 0.95
    hit_cooldown: float = 0.25

    def validate(self) -> None:
        if self.time_limit <= 0:
            raise PackageValidationError("session: time_limit_s must be > 0")
        if self.max_health < 1:
            raise PackageValidationError("session: max_health must be >= 1")
        if self.hit_penalty < 1:
            raise PackageValidationError("session: hit_penalty must be >= 1")
        if not 0.0 < self.completion_exposure <= 1.0:
            raise PackageValidationError("session: completion_exposure must be in (0, 1]")
        if self.hit_cooldown < 0:
            raise PackageValidationError("session: hit_cooldown_s must be >= 0")

    def to_dict(self) -> dict:
        return {
            "time_limit_s": self.time_limit,
            "max_health": self.max_health,
            "hit_penalty": self.hit_penalty,
            "completion_exposure": self.completion_exposure,
            "hit_cooldown_s": self.hit_cooldown,
        }

    @classmethod
    def from_dict(cls, data: dict, path: str = "session") -> "SessionParams":
        _check_keys(
            data,
            path,
            set(),
            {"time_limit_s", "max_health", "hit_penalty", "completion_exposure", "hit_cooldown_s"},
        )
        base = cls()
        params = cls(
            time_limit=float(data.get("time_limit_s", base.time_limit)),
            max_health=int(data.get("max_health", base.max_health)),
            hit_penalty=int(data.get("hit_penalty", base.hit_penalty)),
            completion_exposure=float(data.get("completion_exposure", base.completion_exposure)),
            hit_cooldown=float(data.get("hit_cooldown_s", base.hit_cooldown)),
        )
        params.validate()
        return params

    def merged(self, overrides: dict) -> "SessionParams":
        """New params with the given package-format keys replaced."""
        merged = dict(self.to_dict())
        unknown = overrides.keys() - merged.keys()
        if unknown:
            raise PackageValidationError(f"session override: unknown key(s) {sorted(unknown)}")
        merged.update(overrides)
        return SessionParams.from_dict(merged)


@dataclass(frozen=True)
class Tool:
    name: str
    brush: Brush

    def to_dict(self) -> dict:
        if self.brush.shape == BrushShape.SPHERE:
            shape = {"type": "sphere", "radius": self.brush.radius}
        else:
            shape = {"type": "box", "half_extents": list(self.brush.half_extents)}
        return {
            "name": self.name,
            "shape": shape,
            "strength": self.brush.strength,
            "falloff": self.brush.falloff.value,
        }

    @classmethod
    def from_dict(cls, data: dict, path: str) -> "Tool":
        _check_keys(data, path, {"name", "shape"}, {"strength", "falloff"})
        name = data["name"]
        if not isinstance(name, str) or not name:
            raise PackageValidationError(f"{path}: name must be a non-empty string")
        strength = float(data.get("strength", 1.0))
        falloff = data.get("falloff", "HARD")
        if falloff not in (Falloff.HARD.value, Falloff.LINEAR.value):
            raise PackageValidationError(f"{path}: falloff must be HARD or LINEAR")
        shape = data["shape"]
        _check_keys(shape, f"{path}.shape", {"type"}, {"radius", "half_extents"})
        try:
            if shape["type"] == "sphere":
                if "radius" not in shape:
                    raise PackageValidationError(f"{path}.shape: sphere needs radius")
                brush = Brush.sphere(shape["radius"], strength, falloff)
            elif shape["type"] == "box":
                if "half_extents" not in shape:
                    raise PackageValidationError(f"{path}.shape: box needs half_extents")
                half = shape["half_extents"]
                if not isinstance(half, list) or len(half) != 3:
                    raise PackageValidationError(f"{path}.shape: half_extents must be [x, y, z]")
                brush = Brush.box(half, strength, falloff)
            else:
                raise PackageValidationError(f"{path}.shape: unknown type {shape['type']!r}")
        except ValueError as exc:
            raise PackageValidationError(f"{path}: {exc}") from None
        return cls(name, brush)


@dataclass
class ArtifactSpec:
    name: str
    geometry: SdfNode
    triggers: list[TriggerPoint]
    completion_dialog: DialogPayload
    clod_edge: float
    cell_size: float
    tools: list[Tool]
    session_params: SessionParams = field(default_factory=SessionParams)
    reveal_margin: float = DEFAULT_REVEAL_MARGIN
    allow_trigger_override: bool = False

    def validate(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise PackageValidationError("name must be a non-empty string")
        if self.clod_edge <= 0 or self.cell_size <= 0:
            raise PackageValidationError("clod_edge and cell_size must be > 0")
        cells = self.clod_edge / self.cell_size
        if cells > MAX_CELLS_PER_AXIS:
            raise PackageValidationError(
                f"grid would need {cells:.0f} cells per axis (limit {MAX_CELLS_PER_AXIS})"
            )
        if self.reveal_margin <= 0:
            raise PackageValidationError("reveal_margin must be > 0")
        self.geometry.validate()
        lo, hi = self.geometry.bounds()
        if np.any(lo <= 0.0) or np.any(hi >= self.clod_edge):
            raise PackageValidationError("geometry is not strictly inside the clod")
        if len(self.triggers) != DEFAULT_TRIGGER_COUNT and not self.allow_trigger_override:
            raise PackageValidationError(
                f"triggers: expected exactly {DEFAULT_TRIGGER_COUNT} "
                "(three reveal dialogs per relic; set allow_trigger_override to change)"
            )
        seen = set()
        for i, trig in enumerate(self.triggers):
            if trig.id in seen:
                raise PackageValidationError(f"triggers[{i}]: duplicate id {trig.id!r}")
            seen.add(trig.id)
            pos = np.asarray(trig.position, dtype=np.float64)
            if np.any(pos <= 0.0) or np.any(pos >= self.clod_edge):
                raise PackageValidationError(f"triggers[{i}] ({trig.id}): position outside the clod")
            d = self.geometry.evaluate(pos)
            if d <= 0.0:
                raise PackageValidationError(f"triggers[{i}] ({trig.id}): trigger inside artifact")
            if d > self.reveal_margin:
                raise PackageValidationError(
                    f"triggers[{i}] ({trig.id}): {d:.4f} m from the relic surface "
                    f"exceeds reveal_margin {self.reveal_margin}"
                )
        if not self.tools:
            raise PackageValidationError("tools: at least one tool required")
        names = [t.name for t in self.tools]
        if len(set(names)) != len(names):
            raise PackageValidationError("tools: names must be unique")

    def tool(self, name: str) -> Tool:
        for t in self.tools:
            if t.name == name:
                return t
        raise KeyError(name)

    def to_document(self) -> dict:
        doc = {
            "name": self.name,
            "geometry": self.geometry.to_dict(),
            "triggers": [t.to_dict() for t in self.triggers],
            "completion_dialog": self.completion_dialog.to_dict(),
            "clod_edge": self.clod_edge,
            "cell_size": self.cell_size,
            "tools": [t.to_dict() for t in self.tools],
            "session": self.session_params.to_dict(),
        }
        if self.reveal_margin != DEFAULT_REVEAL_MARGIN:
            doc["reveal_margin"] = self.reveal_margin
        if self.allow_trigger_override:
            doc["allow_trigger_override"] = True
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True) + "\n"

    @property
    def spec_hash(self) -> str:
        canonical = json.dumps(self.to_document(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def spec_from_document(data: dict) -> ArtifactSpec:
    _check_keys(
        data,
        "package",
        {"name", "geometry", "triggers", "completion_dialog", "clod_edge", "cell_size", "tools"},
        {"session", "reveal_margin", "allow_trigger_override"},
    )
    triggers = data["triggers"]
    if not isinstance(triggers, list):
        raise PackageValidationError("triggers: expected an array")
    tools = data["tools"]
    if not isinstance(tools, list):
        raise PackageValidationError("tools: expected an array")
    spec = ArtifactSpec(
        name=data["name"],
        geometry=sdf_tree.from_dict(data["geometry"]),
        triggers=[TriggerPoint.from_dict(t, f"triggers[{i}]") for i, t in enumerate(triggers)],
        completion_dialog=DialogPayload.from_dict(data["completion_dialog"], "completion_dialog"),
        clod_edge=float(data["clod_edge"]),
        cell_size=float(data["cell_size"]),
        tools=[Tool.from_dict(t, f"tools[{i}]") for i, t in enumerate(tools)],
        session_params=SessionParams.from_dict(data.get("session", {})),
        reveal_margin=float(data.get("reveal_margin", DEFAULT_REVEAL_MARGIN)),
        allow_trigger_override=bool(data.get("allow_trigger_override", False)),
    )
    spec.validate()
    return spec


def load_spec(document: str) -> ArtifactSpec:
    """Parse and fully validate a package document (JSON text)."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise PackageParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise PackageValidationError("package: top level must be an object")
    return spec_from_document(data)


def load_spec_file(path) -> ArtifactSpec:
    with open(path, "r", encoding="utf-8") as f:
        return load_spec(f.read())


DEFAULT_TOOLS = (
    Tool("hammer", Brush.sphere(0.05)),
    Tool("shovel", Brush.box((0.10, 0.06, 0.015))),
)


def _arhat_spec() -> ArtifactSpec:
    geometry = Union(
        [
            Box((1.0, 0.35, 1.0), (0.47, 0.20, 0.38)),  # rocky pedestal
            Box((1.0, 0.645, 1.0), (0.34, 0.10, 0.26)),  # folded legs
            Capsule((1.0, 0.95, 0.98), (1.0, 1.35, 0.98), 0.27),  # robed torso
            Sphere((1.0, 1.69, 0.98), 0.16),  # head
            Capsule((0.76, 1.30, 0.98), (0.86, 0.78, 1.18), 0.085),  # left arm
            Capsule((1.24, 1.30, 0.98), (1.14, 0.78, 1.18), 0.085),  # right arm
        ]
    )
    triggers = [
        TriggerPoint(
            "face",
            (1.0, 1.69, 1.18),
            DialogPayload(
                "A Serene Face",
                "The calm, lifelike expression emerges from the earth. Sculptors of "
                "seated luohan figures modelled each face on a living monk, catching "
                "him mid-thought rather than in formal repose.",
                "audio/arhat/face.ogg",
            ),
        ),
        TriggerPoint(
            "hands",
            (0.86, 0.80, 1.305),
            DialogPayload(
                "Hands at Rest",
                "Both hands settle on the lap in a meditation gesture. The pose marks "
                "an arhat: a disciple shown not as a deity but as a person deep in "
                "practice, robes pooling around crossed legs.",
                "audio/arhat/hands.ogg",
            ),
        ),
        TriggerPoint(
            "pedestal",
            (1.0, 0.35, 1.42),
            DialogPayload(
                "The Rocky Seat",
                "The figure sits on a craggy outcrop rather than a throne. The rough "
                "base was glazed in darker tones so the polished body above seemed to "
                "rise straight out of the mountain.",
                "audio/arhat/pedestal.ogg",
            ),
        ),
    ]
    completion = DialogPayload(
        "The Seated Luohan",
        "A life-size glazed ceramic luohan, fully freed from the clod. Figures like "
        "this sat in temple halls in long rows, each one individual, each one a "
        "portrait of attention. Its glaze still carries the sheen the kiln gave it "
        "centuries ago.",
        "audio/arhat/complete.ogg",
    )
    return ArtifactSpec(
        name="arhat",
        geometry=geometry,
        triggers=triggers,
        completion_dialog=completion,
        clod_edge=2.0,
        cell_size=0.02,
        tools=list(DEFAULT_TOOLS),
    )


def _gold_mask_spec() -> ArtifactSpec:
    geometry = Union(
        [
            Capsule((1.0, 0.45, 1.0), (1.0, 0.95, 1.0), 0.28),  # neck socle
            Sphere((1.0, 1.43, 1.0), 0.42),  # cranium
            Box((1.0, 1.30, 1.22), (0.30, 0.30, 0.12)),  # mask plane
            Box((0.56, 1.55, 0.98), (0.06, 0.26, 0.13)),  # left ear
            Box((1.44, 1.55, 0.98), (0.06, 0.26, 0.13)),  # right ear
            Capsule((0.85, 1.47, 1.30), (0.85, 1.47, 1.44), 0.06),  # left eye
            Capsule((1.15, 1.47, 1.30), (1.15, 1.47, 1.44), 0.06),  # right eye
        ]
    )
    triggers = [
        TriggerPoint(
            "ear",
            (0.56, 1.55, 1.15),
            DialogPayload(
                "Monumental Ears",
                "A flared, fin-like ear far larger than any human one. The casters "
                "exaggerated ears and eyes deliberately; this was never a portrait "
                "but a presence meant to hear and see beyond people.",
                "audio/gold_mask/ear.ogg",
            ),
        ),
        TriggerPoint(
            "eye",
            (0.85, 1.47, 1.54),
            DialogPayload(
                "Watchful Eyes",
                "The pupils push out of the face on stalks. Bronze heads with "
                "protruding eyes are unique to one ancient workshop tradition, and "
                "their meaning is still argued over today.",
                "audio/gold_mask/eye.ogg",
            ),
        ),
        TriggerPoint(
            "neck",
            (1.0, 0.55, 1.325),
            DialogPayload(
                "The Cast Socle",
                "The neck ends in a clean cylindrical socket. Heads like this were "
                "cast separately and mounted on posts or bodies of other materials, "
                "long since rotted away.",
                "audio/gold_mask/neck.ogg",
            ),
        ),
    ]
    completion = DialogPayload(
        "The Gilded Bronze Head",
        "A monumental bronze head sheathed in a hammered gold-foil mask. The gold "
        "was pressed over the bronze features while both were polished, fusing two "
        "crafts into one startling face that guarded its pit for three thousand "
        "years.",
        "audio/gold_mask/complete.ogg",
    )
    return ArtifactSpec(
        name="gold_mask",
        geometry=geometry,
        triggers=triggers,
        completion_dialog=completion,
        clod_edge=2.0,
        cell_size=0.02,
        tools=list(DEFAULT_TOOLS),
    )


def builtin_relics() -> list[ArtifactSpec]:
    """The two bundled relics, validated and volume-matched within 10%."""
    specs = [_arhat_spec(), _gold_mask_spec()]
    for spec in specs:
        spec.validate()
    return specs


def builtin_relic(name: str) -> ArtifactSpec:
    for spec in builtin_relics():
        if spec.name == name:
            return spec
    raise KeyError(name)
