"""Chunked marching cubes over scalar sample lattices.

Samples live at cell centers. A marching cube with min-corner c spans samples
c .. c+1 per axis; the interior cube domain is [0, n-2] so neighbouring chunks
share apron samples and meet without cracks. With closed_boundary the domain
grows to [-1, n-1] and out-of-lattice samples read 0 (open air), which caps the
clod with a skin exactly on the lattice boundary. Case bit k is set when corner
k samples below the isovalue, i.e. bits mark air and the surface wraps the
high-valued (solid) side. Normals are interpolated central-difference gradients
negated to point out of the solid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateArtifactError
from .mc_tables import CORNER_OFFSETS, EDGE_CORNERS, EDGE_TABLE, TRI_TABLE
from .sdf import SdfNode
from .voxel import CHUNK_SIZE, VoxelGrid

_EDGE_BASE = np.zeros((12, 3), dtype=np.int64)
_EDGE_AXIS = np.zeros(12, dtype=np.int64)
for _e, (_a, _b) in enumerate(EDGE_CORNERS):
    _ca = np.asarray(CORNER_OFFSETS[_a])
    _cb = np.asarray(CORNER_OFFSETS[_b])
    _EDGE_BASE[_e] = np.minimum(_ca, _cb)
    _EDGE_AXIS[_e] = int(np.nonzero(_ca != _cb)[0][0])

_EDGE_TABLE = np.asarray(EDGE_TABLE, dtype=np.int32)
_TRI_PAD = np.full((256, 16), -1, dtype=np.int8)
for _i, _row in enumerate(TRI_TABLE):
    _TRI_PAD[_i, : len(_row)] = _row
_CASE_BITS = np.left_shift(1, np.arange(8), dtype=np.int32)


@dataclass
class MeshChunk:
    chunk_coord: tuple[int, int, int]
    version: int
    vertices: np.ndarray  # (n, 3) float64 world positions
    normals: np.ndarray  # (n, 3) float64 unit vectors
    indices: np.ndarray  # (t, 3) int32 triangles, CCW from outside

    @property
    def triangle_count(self) -> int:
        return int(len(self.indices))


def _empty_geometry():
    return (
        np.empty((0, 3), dtype=np.float64),
        np.empty((0, 3), dtype=np.float64),
        np.empty((0, 3), dtype=np.int32),
    )


def _extract_block(field, origin, cell_size, isovalue, cube_lo, cube_hi, pad_value):
    """Marching cubes over cubes [cube_lo, cube_hi) of one sample lattice.

    pad_value None clamps out-of-lattice sample reads to the boundary sample
    (open mode never places cubes outside anyway); a float pads with that value.
    Returns (vertices, normals, indices).
    """
    dims = np.asarray(field.shape, dtype=np.int64)
    cube_lo = np.asarray(cube_lo, dtype=np.int64)
    cube_hi = np.asarray(cube_hi, dtype=np.int64)
    nc = cube_hi - cube_lo
    if np.any(nc <= 0):
        return _empty_geometry()

    # sample block [cube_lo-1, cube_hi+2) per axis: corners plus gradient stencil
    s0 = cube_lo - 1
    s1 = cube_hi + 2
    if pad_value is None:
        idx = [np.clip(np.arange(s0[a], s1[a]), 0, dims[a] - 1) for a in range(3)]
        block = field[np.ix_(*idx)]
    else:
        block = np.full(tuple(s1 - s0), float(pad_value), dtype=np.float64)
        lo = np.maximum(s0, 0)
        hi = np.minimum(s1, dims)
        src = tuple(slice(int(lo[a]), int(hi[a])) for a in range(3))
        dst = tuple(slice(int(lo[a] - s0[a]), int(hi[a] - s0[a])) for a in range(3))
        block[dst] = field[src]

    case = np.zeros(tuple(nc), dtype=np.int32)
    for k, (ox, oy, oz) in enumerate(CORNER_OFFSETS):
        vals = block[
            1 + ox : 1 + ox + nc[0],
            1 + oy : 1 + oy + nc[1],
            1 + oz : 1 + oz + nc[2],
        ]
        case += (vals < isovalue) * _CASE_BITS[k]

    active = (case != 0) & (case != 255)
    if not active.any():
        return _empty_geometry()
    cubes = np.argwhere(active) + cube_lo
    cases = case[active]

    # one key per lattice edge: owning sample (shifted non-negative) and axis
    span = dims + 2
    samples12 = cubes[:, None, :] + _EDGE_BASE[None, :, :]
    shifted = samples12 + 1
    keys12 = (
        (shifted[:, :, 0] * span[1] + shifted[:, :, 1]) * span[2] + shifted[:, :, 2]
    ) * 3 + _EDGE_AXIS[None, :]

    used = (_EDGE_TABLE[cases][:, None] >> np.arange(12)) & 1 != 0
    unique_keys = np.unique(keys12[used])

    axis = (unique_keys % 3).astype(np.int64)
    lin = unique_keys // 3
    s = np.empty((len(unique_keys), 3), dtype=np.int64)
    s[:, 2] = lin % span[2] - 1
    s[:, 1] = (lin // span[2]) % span[1] - 1
    s[:, 0] = lin // (span[2] * span[1]) - 1
    s2 = s.copy()
    s2[np.arange(len(s2)), axis] += 1

    bi = s - s0
    bi2 = s2 - s0
    v0 = block[bi[:, 0], bi[:, 1], bi[:, 2]]
    v1 = block[bi2[:, 0], bi2[:, 1], bi2[:, 2]]
    denom = v1 - v0
    safe = np.where(denom != 0.0, denom, 1.0)
    t = np.where(denom != 0.0, (isovalue - v0) / safe, 0.5)

    origin = np.asarray(origin, dtype=np.float64)
    pos = origin + (s + 0.5) * cell_size
    pos[np.arange(len(pos)), axis] += t * cell_size

    # central-difference gradients on samples [cube_lo, cube_hi], from block
    inv = 1.0 / (2.0 * cell_size)
    gx = (block[2:, 1:-1, 1:-1] - block[:-2, 1:-1, 1:-1]) * inv
    gy = (block[1:-1, 2:, 1:-1] - block[1:-1, :-2, 1:-1]) * inv
    gz = (block[1:-1, 1:-1, 2:] - block[1:-1, 1:-1, :-2]) * inv
    gi = s - cube_lo
    gi2 = s2 - cube_lo
    g0 = np.stack(
        [g[gi[:, 0], gi[:, 1], gi[:, 2]] for g in (gx, gy, gz)], axis=1
    )
    g1 = np.stack(
        [g[gi2[:, 0], gi2[:, 1], gi2[:, 2]] for g in (gx, gy, gz)], axis=1
    )
    grad = g0 + t[:, None] * (g1 - g0)
    normals = -grad
    norms = np.linalg.norm(normals, axis=1)
    degenerate = norms == 0.0
    if degenerate.any():
        normals[degenerate] = (0.0, 0.0, 1.0)
        norms[degenerate] = 1.0
    normals /= norms[:, None]

    tri_slots = _TRI_PAD[cases]
    valid = tri_slots >= 0
    gathered = np.take_along_axis(
        keys12, np.where(valid, tri_slots, 0).astype(np.int64), axis=1
    )
    tri_keys = gathered[valid]
    # table order is already CCW from outside the solid under the air-bit convention
    indices = np.searchsorted(unique_keys, tri_keys).astype(np.int32).reshape(-1, 3)
    return pos, normals, indices


class ChunkMesher:
    """Incremental per-chunk extraction bound to one grid."""

    def __init__(self, grid: VoxelGrid, *, closed_boundary: bool = False, isovalue: float = 0.5):
        self.grid = grid
        self.closed_boundary = closed_boundary
        self.isovalue = isovalue
        self._versions: dict[tuple[int, int, int], int] = {}
        self._cache: dict[tuple[int, int, int], MeshChunk] = {}
        self._dirty = grid.all_chunk_coords()
        grid.attach_dirty_sink(self._dirty)

    def _cube_range(self, chunk_coord):
        n = self.grid.dims
        lo, hi = [], []
        for a in range(3):
            c0 = chunk_coord[a] * CHUNK_SIZE
            c1 = min(c0 + CHUNK_SIZE, n[a] if self.closed_boundary else n[a] - 1)
            if self.closed_boundary and chunk_coord[a] == 0:
                c0 = -1
            lo.append(c0)
            hi.append(c1)
        return lo, hi

    def extract_chunk(self, chunk_coord, isovalue: float | None = None) -> MeshChunk:
        """Pure extraction of one chunk (version 0) from the current grid state."""
        chunk_coord = tuple(int(c) for c in chunk_coord)
        for a in range(3):
            if not 0 <= chunk_coord[a] < self.grid.chunk_counts[a]:
                raise IndexError(f"chunk {chunk_coord} out of range")
        lo, hi = self._cube_range(chunk_coord)
        verts, normals, idx = _extract_block(
            self.grid.density,
            self.grid.origin,
            self.grid.cell_size,
            self.isovalue if isovalue is None else isovalue,
            lo,
            hi,
            0.0 if self.closed_boundary else None,
        )
        return MeshChunk(chunk_coord, 0, verts, normals, idx)

    def _store(self, chunk: MeshChunk) -> MeshChunk:
        version = self._versions.get(chunk.chunk_coord, 0) + 1
        self._versions[chunk.chunk_coord] = version
        chunk.version = version
        self._cache[chunk.chunk_coord] = chunk
        return chunk

    def remesh_dirty(self) -> list[MeshChunk]:
        out = [self._store(self.extract_chunk(coord)) for coord in sorted(self._dirty)]
        self._dirty.clear()
        return out

    def snapshot(self) -> list[MeshChunk]:
        """Current mesh of every chunk (extracting any never-meshed ones)."""
        self.remesh_dirty()
        all_coords = [
            (cx, cy, cz)
            for cx in range(self.grid.chunk_counts[0])
            for cy in range(self.grid.chunk_counts[1])
            for cz in range(self.grid.chunk_counts[2])
        ]
        for coord in all_coords:
            if coord not in self._cache:
                self._store(self.extract_chunk(coord))
        return [self._cache[c] for c in all_coords]


def grid_dims(clod_edge: float, cell_size: float) -> int:
    return int(math.ceil(clod_edge / cell_size - 1e-9))


def mesh_artifact(
    sdf: SdfNode,
    clod_edge: float,
    cell_size: float,
    *,
    origin=(0.0, 0.0, 0.0),
    samples: np.ndarray | None = None,
) -> list[MeshChunk]:
    """One-time relic mesh: marching cubes of -sdf at isovalue 0 on the grid lattice.

    samples may carry precomputed sdf values at cell centers to skip resampling.
    Only chunks holding triangles are returned, each at version 1.
    """
    n = grid_dims(clod_edge, cell_size)
    origin = np.asarray(origin, dtype=np.float64)
    if samples is None:
        samples = np.empty((n, n, n), dtype=np.float64)
        ys = origin[1] + (np.arange(n, dtype=np.float64) + 0.5) * cell_size
        zs = origin[2] + (np.arange(n, dtype=np.float64) + 0.5) * cell_size
        gy, gz = np.meshgrid(ys, zs, indexing="ij")
        slab = np.empty((n * n, 3), dtype=np.float64)
        slab[:, 1] = gy.ravel()
        slab[:, 2] = gz.ravel()
        for ix in range(n):
            slab[:, 0] = origin[0] + (ix + 0.5) * cell_size
            samples[ix] = sdf.evaluate(slab).reshape(n, n)
    field = -samples

    chunks = []
    counts = -(-n // CHUNK_SIZE)
    for cx in range(counts):
        for cy in range(counts):
            for cz in range(counts):
                lo = [cx * CHUNK_SIZE, cy * CHUNK_SIZE, cz * CHUNK_SIZE]
                hi = [min(v + CHUNK_SIZE, n - 1) for v in lo]
                verts, normals, idx = _extract_block(
                    field, origin, cell_size, 0.0, lo, hi, None
                )
                if len(idx):
                    chunks.append(MeshChunk((cx, cy, cz), 1, verts, normals, idx))
    if not chunks:
        raise DegenerateArtifactError("artifact SDF never crosses zero on the grid")
    return chunks


def write_obj(path, chunks: list[MeshChunk]) -> None:
    """ASCII OBJ with v/vn records and 1-based f v//vn faces."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("# digsite mesh export\n")
        offset = 1
        for chunk in chunks:
            for v in chunk.vertices:
                f.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
            for vn in chunk.normals:
                f.write(f"vn {vn[0]:.9g} {vn[1]:.9g} {vn[2]:.9g}\n")
            for a, b, c in chunk.indices + offset:
                f.write(f"f {a}//{a} {b}//{b} {c}//{c}\n")
            offset += len(chunk.vertices)


def edge_share_counts(chunks: list[MeshChunk]) -> dict[int, int]:
    """Histogram of triangles-per-edge after welding vertices by exact position.

    A closed mesh reports {2: edge_count}; boundary or non-manifold edges show
    up under other keys.
    """
    weld: dict[bytes, int] = {}
    remap = []
    for chunk in chunks:
        ids = np.empty(len(chunk.vertices), dtype=np.int64)
        for i, v in enumerate(chunk.vertices):
            key = v.tobytes()
            ids[i] = weld.setdefault(key, len(weld))
        remap.append(ids)
    counts: dict[tuple[int, int], int] = {}
    for chunk, ids in zip(chunks, remap):
        for a, b, c in ids[chunk.indices]:
            for u, v in ((a, b), (b, c), (c, a)):
                edge = (u, v) if u < v else (v, u)
                counts[edge] = counts.get(edge, 0) + 1
    hist: dict[int, int] = {}
    for n in counts.values():
        hist[n] = hist.get(n, 0) + 1
    return hist
