"""Small geometry helpers: poses, quaternions, rotation matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def normalize_quat(q: np.ndarray) -> np.ndarray:
    """Return q scaled to unit length; identity for a zero quaternion."""
    q = np.asarray(q, dtype=np.float64)
    n = float(np.sqrt(np.dot(q, q)))
    if n == 0.0:
        return np.array([1.0, 0.0, 0.0, 0.0])
    return q / n


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrix for a unit quaternion given as (w, x, y, z)."""
    w, x, y, z = normalize_quat(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_from_z_to(direction: np.ndarray) -> np.ndarray:
    """Quaternion rotating the +z axis onto `direction` (unit or not)."""
    d = np.asarray(direction, dtype=np.float64)
    n = float(np.linalg.norm(d))
    if n == 0.0:
        return np.array([1.0, 0.0, 0.0, 0.0])
    d = d / n
    z = np.array([0.0, 0.0, 1.0])
    c = float(np.dot(z, d))
    if c <= -1.0 + 1e-12:
        # antiparallel: half-turn about x
        return np.array([0.0, 1.0, 0.0, 0.0])
    axis = np.cross(z, d)
    q = np.array([1.0 + c, axis[0], axis[1], axis[2]])
    return normalize_quat(q)


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a*b: rotation b applied first, then a."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def random_unit_quat(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation (Shoemake subgroup algorithm)."""
    u1, u2, u3 = rng.uniform(0.0, 1.0, 3)
    a, b = np.sqrt(1.0 - u1), np.sqrt(u1)
    return np.array(
        [
            a * np.sin(2 * np.pi * u2),
            a * np.cos(2 * np.pi * u2),
            b * np.sin(2 * np.pi * u3),
            b * np.cos(2 * np.pi * u3),
        ]
    )


IDENTITY_QUAT = (1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Pose:
    """Rigid transform: world position plus orientation quaternion (w, x, y, z)."""

    position: tuple[float, float, float]
    orientation: tuple[float, float, float, float] = field(default=IDENTITY_QUAT)

    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(np.asarray(self.orientation))

    def to_dict(self) -> dict:
        return {
            "position": [float(v) for v in self.position],
            "orientation": [float(v) for v in self.orientation],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Pose":
        pos = data["position"]
        quat = data.get("orientation", list(IDENTITY_QUAT))
        if len(pos) != 3 or len(quat) != 4:
            raise ValueError("pose needs a 3-vector position and 4-vector orientation")
        return cls(tuple(float(v) for v in pos), tuple(float(v) for v in quat))
