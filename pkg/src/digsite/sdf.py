"""Analytic signed distance fields: primitives and composites for relic geometry.

All nodes evaluate vectorized over an (N, 3) array of points and return (N,)
signed distances, negative inside. Values are exact for primitives and
1-Lipschitz for every composite used here.
"""

from __future__ import annotations

import numpy as np

from .errors import PackageValidationError

MAX_TREE_DEPTH = 32


def _as_points(points) -> tuple[np.ndarray, bool]:
    p = np.asarray(points, dtype=np.float64)
    if p.ndim == 1:
        return p.reshape(1, 3), True
    if p.ndim != 2 or p.shape[1] != 3:
        raise ValueError("points must be (3,) or (N, 3)")
    return p, False


def _vec3(value, name: str, path: str) -> np.ndarray:
    v = np.asarray(value, dtype=np.float64)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise PackageValidationError(f"{path}: {name} must be a finite 3-vector")
    return v


def _positive(value, name: str, path: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise PackageValidationError(f"{path}: {name} must be a number") from None
    if not np.isfinite(v) or v <= 0.0:
        raise PackageValidationError(f"{path}: {name} must be > 0")
    return v


def _check_keys(data: dict, path: str, required: set[str], optional: set[str] = frozenset()):
    if not isinstance(data, dict):
        raise PackageValidationError(f"{path}: expected an object")
    missing = required - data.keys()
    if missing:
        raise PackageValidationError(f"{path}: missing key(s) {sorted(missing)}")
    unknown = data.keys() - required - optional
    if unknown:
        raise PackageValidationError(f"{path}: unknown key(s) {sorted(unknown)}")


class SdfNode:
    """Base class; subclasses implement evaluate(points) and bounds()."""

    def evaluate(self, points):
        p, single = _as_points(points)
        d = self._eval(p)
        return float(d[0]) if single else d

    def _eval(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned (lo, hi) box guaranteed to contain the surface."""
        raise NotImplementedError

    def depth(self) -> int:
        return 1

    def validate(self) -> None:
        if self.depth() > MAX_TREE_DEPTH:
            raise PackageValidationError(f"geometry: tree depth exceeds {MAX_TREE_DEPTH}")

    def to_dict(self) -> dict:
        raise NotImplementedError


class Sphere(SdfNode):
    def __init__(self, center, radius: float):
        self.center = np.asarray(center, dtype=np.float64)
        self.radius = float(radius)

    def _eval(self, p):
        d = p - self.center
        return np.sqrt(np.einsum("ij,ij->i", d, d)) - self.radius

    def bounds(self):
        r = self.radius
        return self.center - r, self.center + r

    def validate(self):
        if self.radius <= 0.0:
            raise PackageValidationError("geometry: sphere radius must be > 0")
        super().validate()

    def to_dict(self):
        return {"type": "sphere", "center": list(self.center), "radius": self.radius}


class Box(SdfNode):
    def __init__(self, center, half_extents):
        self.center = np.asarray(center, dtype=np.float64)
        self.half_extents = np.asarray(half_extents, dtype=np.float64)

    def _eval(self, p):
        q = np.abs(p - self.center) - self.half_extents
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
        inside = np.minimum(q.max(axis=1), 0.0)
        return outside + inside

    def bounds(self):
        return self.center - self.half_extents, self.center + self.half_extents

    def validate(self):
        if np.any(self.half_extents <= 0.0):
            raise PackageValidationError("geometry: box half_extents must be > 0")
        super().validate()

    def to_dict(self):
        return {
            "type": "box",
            "center": list(self.center),
            "half_extents": list(self.half_extents),
        }


class Capsule(SdfNode):
    def __init__(self, p0, p1, radius: float):
        self.p0 = np.asarray(p0, dtype=np.float64)
        self.p1 = np.asarray(p1, dtype=np.float64)
        self.radius = float(radius)

    def _eval(self, p):
        ba = self.p1 - self.p0
        denom = float(np.dot(ba, ba))
        pa = p - self.p0
        if denom == 0.0:
            t = np.zeros(len(p))
        else:
            t = np.clip(pa @ ba / denom, 0.0, 1.0)
        d = pa - t[:, None] * ba
        return np.sqrt(np.einsum("ij,ij->i", d, d)) - self.radius

    def bounds(self):
        r = self.radius
        return np.minimum(self.p0, self.p1) - r, np.maximum(self.p0, self.p1) + r

    def validate(self):
        if self.radius <= 0.0:
            raise PackageValidationError("geometry: capsule radius must be > 0")
        super().validate()

    def to_dict(self):
        return {
            "type": "capsule",
            "p0": list(self.p0),
            "p1": list(self.p1),
            "radius": self.radius,
        }


class Union(SdfNode):
    def __init__(self, children):
        self.children = list(children)

    def _eval(self, p):
        d = self.children[0]._eval(p)
        for child in self.children[1:]:
            d = np.minimum(d, child._eval(p))
        return d

    def bounds(self):
        los, his = zip(*(c.bounds() for c in self.children))
        return np.min(los, axis=0), np.max(his, axis=0)

    def depth(self):
        return 1 + max(c.depth() for c in self.children)

    def validate(self):
        if not self.children:
            raise PackageValidationError("geometry: union needs at least one child")
        super().validate()
        for c in self.children:
            c.validate()

    def to_dict(self):
        return {"type": "union", "children": [c.to_dict() for c in self.children]}


class Translate(SdfNode):
    def __init__(self, child: SdfNode, offset):
        self.child = child
        self.offset = np.asarray(offset, dtype=np.float64)

    def _eval(self, p):
        return self.child._eval(p - self.offset)

    def bounds(self):
        lo, hi = self.child.bounds()
        return lo + self.offset, hi + self.offset

    def depth(self):
        return 1 + self.child.depth()

    def validate(self):
        super().validate()
        self.child.validate()

    def to_dict(self):
        return {"type": "translate", "child": self.child.to_dict(), "offset": list(self.offset)}


class ScaleUniform(SdfNode):
    """Uniform scale about the origin: sdf(p) = f * child(p / f)."""

    def __init__(self, child: SdfNode, factor: float):
        self.child = child
        self.factor = float(factor)

    def _eval(self, p):
        return self.factor * self.child._eval(p / self.factor)

    def bounds(self):
        lo, hi = self.child.bounds()
        return lo * self.factor, hi * self.factor

    def depth(self):
        return 1 + self.child.depth()

    def validate(self):
        if self.factor <= 0.0:
            raise PackageValidationError("geometry: scale factor must be > 0")
        super().validate()
        self.child.validate()

    def to_dict(self):
        return {"type": "scale_uniform", "child": self.child.to_dict(), "factor": self.factor}


def from_dict(data: dict, path: str = "geometry", _depth: int = 1) -> SdfNode:
    """Parse an SDF tree from package JSON, rejecting unknown keys."""
    if _depth > MAX_TREE_DEPTH:
        raise PackageValidationError(f"{path}: tree is too deep (limit {MAX_TREE_DEPTH})")
    if not isinstance(data, dict) or "type" not in data:
        raise PackageValidationError(f"{path}: expected an object with a 'type' key")
    kind = data["type"]
    if kind == "sphere":
        _check_keys(data, path, {"type", "center", "radius"})
        node = Sphere(_vec3(data["center"], "center", path), _positive(data["radius"], "radius", path))
    elif kind == "box":
        _check_keys(data, path, {"type", "center", "half_extents"})
        half = _vec3(data["half_extents"], "half_extents", path)
        if np.any(half <= 0.0):
            raise PackageValidationError(f"{path}: half_extents must be > 0")
        node = Box(_vec3(data["center"], "center", path), half)
    elif kind == "capsule":
        _check_keys(data, path, {"type", "p0", "p1", "radius"})
        node = Capsule(
            _vec3(data["p0"], "p0", path),
            _vec3(data["p1"], "p1", path),
            _positive(data["radius"], "radius", path),
        )
    elif kind == "union":
        _check_keys(data, path, {"type", "children"})
        children = data["children"]
        if not isinstance(children, list) or not children:
            raise PackageValidationError(f"{path}: children must be a non-empty array")
        node = Union(
            from_dict(c, f"{path}.children[{i}]", _depth + 1) for i, c in enumerate(children)
        )
    elif kind == "translate":
        _check_keys(data, path, {"type", "child", "offset"})
        node = Translate(
            from_dict(data["child"], f"{path}.child", _depth + 1),
            _vec3(data["offset"], "offset", path),
        )
    elif kind == "scale_uniform":
        _check_keys(data, path, {"type", "child", "factor"})
        node = ScaleUniform(
            from_dict(data["child"], f"{path}.child", _depth + 1),
            _positive(data["factor"], "factor", path),
        )
    else:
        raise PackageValidationError(f"{path}: unknown SDF type {kind!r}")
    return node
