"""The clod: a uniform density grid with material labels and brush carving.

Cell (i, j, k) has its center at origin + (index + 0.5) * cell_size. Density is
earth occupancy in [0, 1]; a non-artifact cell is EMPTY once density < 0.5.
Artifact cells are fixed at init from the relic SDF and never change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DegenerateArtifactError, GridConfigError
from .geom import Pose
from .sdf import SdfNode

CHUNK_SIZE = 16
MAX_CELLS_PER_AXIS = 512
EMPTY_THRESHOLD = 0.5

FACE_OFFSETS = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))


class BrushShape(str, Enum):
    SPHERE = "SPHERE"
    BOX = "BOX"


class Falloff(str, Enum):
    HARD = "HARD"
    LINEAR = "LINEAR"


@dataclass(frozen=True)
class Brush:
    """Carving kernel: spherical or box support with HARD or LINEAR falloff."""

    shape: BrushShape
    strength: float = 1.0
    falloff: Falloff = Falloff.HARD
    radius: float | None = None
    half_extents: tuple[float, float, float] | None = None

    def __post_init__(self):
        if not 0.0 < self.strength <= 1.0:
            raise ValueError("strength must be in (0, 1]")
        if self.shape == BrushShape.SPHERE:
            if self.radius is None or self.radius <= 0.0:
                raise ValueError("sphere brush needs radius > 0")
        else:
            if self.half_extents is None or any(h <= 0.0 for h in self.half_extents):
                raise ValueError("box brush needs half_extents > 0")

    @classmethod
    def sphere(cls, radius, strength=1.0, falloff=Falloff.HARD):
        return cls(BrushShape.SPHERE, strength, Falloff(falloff), radius=float(radius))

    @classmethod
    def box(cls, half_extents, strength=1.0, falloff=Falloff.HARD):
        return cls(
            BrushShape.BOX,
            strength,
            Falloff(falloff),
            half_extents=tuple(float(h) for h in half_extents),
        )


@dataclass
class CarveResult:
    removed_volume: float
    cells_changed: int
    cells_emptied: int
    artifact_contact: bool
    contact_point: tuple[float, float, float] | None
    emptied_cells: np.ndarray  # (k, 3) int cell coordinates

    def summary(self) -> dict:
        return {
            "removed_volume": self.removed_volume,
            "cells_changed": self.cells_changed,
            "cells_emptied": self.cells_emptied,
            "artifact_contact": self.artifact_contact,
            "contact_point": list(self.contact_point) if self.contact_point else None,
        }


_ZERO_RESULT_FIELDS = dict(
    removed_volume=0.0,
    cells_changed=0,
    cells_emptied=0,
    artifact_contact=False,
    contact_point=None,
)


class VoxelGrid:
    """Cubic voxel grid; construct via init_grid."""

    def __init__(self, dims, cell_size, origin, density, artifact, sdf_cells):
        self.dims = tuple(int(d) for d in dims)
        self.cell_size = float(cell_size)
        self.origin = np.asarray(origin, dtype=np.float64)
        self.density = density
        self.artifact = artifact
        self.sdf_cells = sdf_cells
        self.chunk_size = CHUNK_SIZE
        self.chunk_counts = tuple(-(-d // CHUNK_SIZE) for d in self.dims)
        self.dirty_chunks: set[tuple[int, int, int]] = self.all_chunk_coords()
        # every attached sink (one per mesher) receives the same dirty marks,
        # so independent meshers never starve each other
        self._dirty_sinks: list[set[tuple[int, int, int]]] = [self.dirty_chunks]
        self._removed_total = 0.0

        empty = self.empty_mask()
        neighbor_non_artifact = self._face_neighbor_any(~self.artifact)
        self.surface_mask = self.artifact & neighbor_non_artifact
        self.surface_total = int(self.surface_mask.sum())
        self.exposed_mask = self.surface_mask & self._face_neighbor_any(empty)
        self.exposed_count = int(self.exposed_mask.sum())

    def all_chunk_coords(self) -> set[tuple[int, int, int]]:
        return {
            (cx, cy, cz)
            for cx in range(self.chunk_counts[0])
            for cy in range(self.chunk_counts[1])
            for cz in range(self.chunk_counts[2])
        }

    def attach_dirty_sink(self, sink: set) -> None:
        self._dirty_sinks.append(sink)

    # -- queries ---------------------------------------------------------

    def empty_mask(self) -> np.ndarray:
        return (~self.artifact) & (self.density < EMPTY_THRESHOLD)

    def labels(self) -> np.ndarray:
        """0 = EARTH, 1 = ARTIFACT, 2 = EMPTY (derived, for tests and tools)."""
        out = np.zeros(self.dims, dtype=np.uint8)
        out[self.artifact] = 1
        out[self.empty_mask()] = 2
        return out

    def cell_center(self, cell) -> np.ndarray:
        return self.origin + (np.asarray(cell, dtype=np.float64) + 0.5) * self.cell_size

    def cell_of_point(self, point) -> tuple[int, int, int] | None:
        idx = np.floor((np.asarray(point, dtype=np.float64) - self.origin) / self.cell_size)
        if np.any(idx < 0) or np.any(idx >= self.dims):
            return None
        return tuple(int(v) for v in idx)

    def exposure_fraction(self) -> float:
        if self.surface_total == 0:
            raise DegenerateArtifactError("artifact has no surface cells")
        return self.exposed_count / self.surface_total

    def removed_total(self) -> float:
        return self._removed_total

    def _face_neighbor_any(self, mask: np.ndarray) -> np.ndarray:
        """True where at least one face-neighbor (inside the grid) is set in mask."""
        out = np.zeros(self.dims, dtype=bool)
        out[1:, :, :] |= mask[:-1, :, :]
        out[:-1, :, :] |= mask[1:, :, :]
        out[:, 1:, :] |= mask[:, :-1, :]
        out[:, :-1, :] |= mask[:, 1:, :]
        out[:, :, 1:] |= mask[:, :, :-1]
        out[:, :, :-1] |= mask[:, :, 1:]
        return out

    # -- carving ---------------------------------------------------------

    def _support_block(self, brush: Brush, pose: Pose):
        """Cell index window around the brush support plus inside mask and kernel.

        Returns (slices, inside, kernel) or None when the support misses the
        grid entirely. kernel is None for HARD falloff (implicitly 1).
        """
        p = np.asarray(pose.position, dtype=np.float64)
        if brush.shape == BrushShape.SPHERE:
            half = np.full(3, brush.radius)
        else:
            rot = pose.rotation_matrix()
            half = np.abs(rot) @ np.asarray(brush.half_extents)
        lo_f = (p - half - self.origin) / self.cell_size - 0.5
        hi_f = (p + half - self.origin) / self.cell_size - 0.5
        i0 = np.maximum(np.floor(lo_f).astype(np.int64), 0)
        i1 = np.minimum(np.ceil(hi_f).astype(np.int64), np.asarray(self.dims) - 1)
        if np.any(i0 > i1):
            return None

        axes = [
            self.origin[a] + (np.arange(i0[a], i1[a] + 1, dtype=np.float64) + 0.5) * self.cell_size
            for a in range(3)
        ]
        dx = (axes[0] - p[0])[:, None, None]
        dy = (axes[1] - p[1])[None, :, None]
        dz = (axes[2] - p[2])[None, None, :]

        if brush.shape == BrushShape.SPHERE:
            r = brush.radius
            d2 = dx * dx + dy * dy + dz * dz
            inside = d2 <= r * r
            kernel = None
            if brush.falloff == Falloff.LINEAR:
                kernel = 1.0 - np.sqrt(d2) / r
        else:
            rot = pose.rotation_matrix()
            hx, hy, hz = brush.half_extents
            qx = dx * rot[0, 0] + dy * rot[1, 0] + dz * rot[2, 0]
            qy = dx * rot[0, 1] + dy * rot[1, 1] + dz * rot[2, 1]
            qz = dx * rot[0, 2] + dy * rot[1, 2] + dz * rot[2, 2]
            inside = (np.abs(qx) <= hx) & (np.abs(qy) <= hy) & (np.abs(qz) <= hz)
            kernel = None
            if brush.falloff == Falloff.LINEAR:
                m = np.maximum(
                    np.abs(qx) / hx, np.maximum(np.abs(qy) / hy, np.abs(qz) / hz)
                )
                kernel = 1.0 - m

        slices = tuple(slice(int(i0[a]), int(i1[a]) + 1) for a in range(3))
        return slices, inside, kernel

    def brush_overlaps_artifact(self, brush: Brush, pose: Pose) -> bool:
        """Read-only check: does the support contain any artifact cell center?"""
        block = self._support_block(brush, pose)
        if block is None:
            return False
        slices, inside, _ = block
        return bool((inside & self.artifact[slices]).any())

    def carve(self, brush: Brush, pose: Pose) -> CarveResult:
        block = self._support_block(brush, pose)
        if block is None:
            return CarveResult(emptied_cells=np.empty((0, 3), dtype=np.int64), **_ZERO_RESULT_FIELDS)
        slices, inside, kernel = block

        art = self.artifact[slices]
        dens = self.density[slices]

        contact = bool((inside & art).any())
        contact_point = None
        if contact:
            sdf_blk = np.where(inside, self.sdf_cells[slices], np.inf)
            # C-order argmin = lexicographically lowest cell among ties
            flat = int(np.argmin(sdf_blk))
            local = np.unravel_index(flat, sdf_blk.shape)
            cell = tuple(int(local[a] + slices[a].start) for a in range(3))
            contact_point = tuple(float(v) for v in self.cell_center(cell))

        earth = inside & ~art & (dens >= EMPTY_THRESHOLD)
        if kernel is None:
            drop = np.where(earth, np.minimum(dens, brush.strength), 0.0)
        else:
            drop = np.where(earth, np.minimum(dens, brush.strength * kernel), 0.0)
        changed = drop > 0.0
        cells_changed = int(changed.sum())
        if cells_changed == 0:
            return CarveResult(
                removed_volume=0.0,
                cells_changed=0,
                cells_emptied=0,
                artifact_contact=contact,
                contact_point=contact_point,
                emptied_cells=np.empty((0, 3), dtype=np.int64),
            )

        new_dens = dens - drop
        emptied = earth & (new_dens < EMPTY_THRESHOLD)
        self.density[slices] = new_dens

        # fsum is correctly rounded, so any independent oracle summing the
        # same drops in any order lands on the identical float
        cell_volume = self.cell_size ** 3
        removed = math.fsum(drop[changed].tolist()) * cell_volume
        self._removed_total += removed

        emptied_cells = np.argwhere(emptied)
        if len(emptied_cells):
            emptied_cells = emptied_cells + np.array([s.start for s in slices])

        changed_idx = np.argwhere(changed)
        lo = changed_idx.min(axis=0) + np.array([s.start for s in slices])
        hi = changed_idx.max(axis=0) + np.array([s.start for s in slices])
        self._mark_dirty(lo, hi)
        self._update_exposure(emptied_cells)

        return CarveResult(
            removed_volume=removed,
            cells_changed=cells_changed,
            cells_emptied=int(len(emptied_cells)),
            artifact_contact=contact,
            contact_point=contact_point,
            emptied_cells=emptied_cells,
        )

    def _mark_dirty(self, cell_lo, cell_hi):
        """Mark every chunk whose mesh depends on cells in [cell_lo, cell_hi].

        A marching cube at min-corner c reads samples c-1 .. c+2 (corner values
        plus gradient stencil), so a changed sample touches cubes c-2 .. c+1.
        """
        cube_lo = np.maximum(cell_lo - 2, 0) // self.chunk_size
        cube_hi = np.minimum(cell_hi + 1, np.asarray(self.dims) - 1) // self.chunk_size
        for cx in range(int(cube_lo[0]), int(cube_hi[0]) + 1):
            for cy in range(int(cube_lo[1]), int(cube_hi[1]) + 1):
                for cz in range(int(cube_lo[2]), int(cube_hi[2]) + 1):
                    for sink in self._dirty_sinks:
                        sink.add((cx, cy, cz))

    def _update_exposure(self, emptied_cells: np.ndarray):
        if len(emptied_cells) == 0 or self.surface_total == 0:
            return
        dims = np.asarray(self.dims)
        for off in FACE_OFFSETS:
            nb = emptied_cells + off
            ok = np.all((nb >= 0) & (nb < dims), axis=1)
            if not ok.any():
                continue
            nb = nb[ok]
            xs, ys, zs = nb[:, 0], nb[:, 1], nb[:, 2]
            fresh = self.surface_mask[xs, ys, zs] & ~self.exposed_mask[xs, ys, zs]
            if fresh.any():
                lin = np.unique(
                    np.ravel_multi_index((xs[fresh], ys[fresh], zs[fresh]), self.dims)
                )
                ux, uy, uz = np.unravel_index(lin, self.dims)
                self.exposed_mask[ux, uy, uz] = True
                self.exposed_count += int(len(lin))


def init_grid(clod_edge: float, cell_size: float, artifact_sdf: SdfNode, origin=(0.0, 0.0, 0.0)) -> VoxelGrid:
    """Build the clod grid: labels from the SDF at cell centers, earth elsewhere."""
    if clod_edge <= 0.0 or cell_size <= 0.0:
        raise GridConfigError("clod_edge and cell_size must be > 0")
    n = int(math.ceil(clod_edge / cell_size - 1e-9))
    if n < 1:
        raise GridConfigError("grid needs at least one cell per axis")
    if n > MAX_CELLS_PER_AXIS:
        raise GridConfigError(
            f"{n} cells per axis exceeds the {MAX_CELLS_PER_AXIS} limit"
        )
    dims = (n, n, n)
    origin = np.asarray(origin, dtype=np.float64)

    sdf_cells = np.empty(dims, dtype=np.float64)
    ys = origin[1] + (np.arange(n, dtype=np.float64) + 0.5) * cell_size
    zs = origin[2] + (np.arange(n, dtype=np.float64) + 0.5) * cell_size
    gy, gz = np.meshgrid(ys, zs, indexing="ij")
    slab = np.empty((n * n, 3), dtype=np.float64)
    slab[:, 1] = gy.ravel()
    slab[:, 2] = gz.ravel()
    for ix in range(n):
        slab[:, 0] = origin[0] + (ix + 0.5) * cell_size
        sdf_cells[ix] = artifact_sdf.evaluate(slab).reshape(n, n)

    artifact = sdf_cells <= 0.0
    if artifact.any():
        for face in (
            artifact[0], artifact[-1],
            artifact[:, 0], artifact[:, -1],
            artifact[:, :, 0], artifact[:, :, -1],
        ):
            if face.any():
                raise GridConfigError("artifact is not strictly inside the clod")

    density = np.ones(dims, dtype=np.float64)
    density[artifact] = 0.0
    # cells whose center falls outside the clod cube start as open air
    centers_1d = origin[0] + (np.arange(n, dtype=np.float64) + 0.5) * cell_size
    outside_1d = centers_1d > origin[0] + clod_edge
    if outside_1d.any():
        density[outside_1d, :, :] = 0.0
        density[:, outside_1d, :] = 0.0
        density[:, :, outside_1d] = 0.0

    return VoxelGrid(dims, cell_size, origin, density, artifact, sdf_cells)


def exposure_fraction(grid: VoxelGrid, artifact_surface_cells: np.ndarray) -> float:
    """Fraction of the given surface cells with an EMPTY (or off-grid) face-neighbor.

    Full scan over the provided set; the grid's own incremental counter must
    agree with this exactly.
    """
    cells = np.asarray(artifact_surface_cells, dtype=np.int64).reshape(-1, 3)
    if len(cells) == 0:
        raise DegenerateArtifactError("artifact has no surface cells")
    empty = grid.empty_mask()
    dims = np.asarray(grid.dims)
    exposed = np.zeros(len(cells), dtype=bool)
    for off in FACE_OFFSETS:
        nb = cells + off
        in_grid = np.all((nb >= 0) & (nb < dims), axis=1)
        exposed[~in_grid] = True
        idx = nb[in_grid]
        exposed[in_grid] |= empty[idx[:, 0], idx[:, 1], idx[:, 2]]
    return int(exposed.sum()) / len(cells)
