"""Shared N-dimensional mesh model.

Topology (facet index tuples) and geometry (vertex coordinates) are kept
separate: geometry updates never touch the facet lists, and simulation-side
code works on deduplicated vertices through a one-time index map while the
render-side arrays keep their duplicated entries.

A facet is an (N-1)-simplex given by N vertex indices; each facet carries
an explicit unit normal, so vertex winding never encodes orientation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

__all__ = [
    "NMesh",
    "Aabb",
    "VertexIndexMap",
    "empty_mesh",
    "facet_centroids",
    "facet_aabb",
    "mesh_aabb",
    "points_aabb",
    "aabb_overlap",
    "bbox_diagonal",
    "dedup_vertices",
    "dedup_points",
    "scatter_positions",
    "simplex_volume",
    "facet_measure",
    "enclosed_volume",
    "compact_mesh",
    "validate_mesh",
]

DEFAULT_MERGE_EPS = 1e-6


@dataclass
class NMesh:
    """Simplicial boundary mesh in N dimensions.

    ``centroids`` is a lazily filled cache; any code that builds a new mesh
    with different geometry must leave it None so it gets recomputed.
    """

    dim: int
    vertices: np.ndarray  # (V, dim) float64
    facets: np.ndarray  # (F, dim) int64 vertex indices
    normals: np.ndarray  # (F, dim) float64, unit length
    centroids: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, self.dim)
        self.facets = np.asarray(self.facets, dtype=np.int64).reshape(-1, self.dim)
        self.normals = np.asarray(self.normals, dtype=np.float64).reshape(-1, self.dim)
        if self.centroids is not None:
            self.centroids = np.asarray(self.centroids, dtype=np.float64).reshape(-1, self.dim)

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    @property
    def facet_count(self) -> int:
        return self.facets.shape[0]

    def is_empty(self) -> bool:
        return self.facet_count == 0


def empty_mesh(dim: int) -> NMesh:
    return NMesh(
        dim,
        np.zeros((0, dim)),
        np.zeros((0, dim), dtype=np.int64),
        np.zeros((0, dim)),
    )


def facet_centroids(mesh: NMesh) -> np.ndarray:
    """Per-facet vertex means, cached on the mesh."""
    if mesh.centroids is None:
        if mesh.facet_count == 0:
            mesh.centroids = np.zeros((0, mesh.dim))
        else:
            mesh.centroids = mesh.vertices[mesh.facets].mean(axis=1)
    return mesh.centroids


@dataclass(frozen=True)
class Aabb:
    min: np.ndarray
    max: np.ndarray


def facet_aabb(mesh: NMesh, facet_id: int) -> Aabb:
    """Componentwise extremes of one facet's vertices."""
    if not (0 <= facet_id < mesh.facet_count):
        raise IndexError(f"facet id {facet_id} out of range (facet count {mesh.facet_count})")
    pts = mesh.vertices[mesh.facets[facet_id]]
    return Aabb(pts.min(axis=0), pts.max(axis=0))


def points_aabb(points: np.ndarray) -> Aabb:
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        dim = pts.shape[1] if pts.ndim == 2 else 0
        return Aabb(np.zeros(dim), np.zeros(dim))
    return Aabb(pts.min(axis=0), pts.max(axis=0))


def mesh_aabb(mesh: NMesh) -> Aabb:
    return points_aabb(mesh.vertices)


def aabb_overlap(a: Aabb, b: Aabb, margin: float = 0.0) -> bool:
    return bool(np.all(a.min <= b.max + margin) and np.all(b.min <= a.max + margin))


def bbox_diagonal(points: np.ndarray) -> float:
    box = points_aabb(points)
    return float(np.linalg.norm(box.max - box.min))


@dataclass
class VertexIndexMap:
    """One-time map between deduplicated and duplicated vertex arrays."""

    unique_vertices: np.ndarray  # (U, dim)
    render_to_unique: np.ndarray  # (V,) int64


def dedup_points(points: np.ndarray, merge_eps: float = DEFAULT_MERGE_EPS) -> VertexIndexMap:
    """Merge points within ``merge_eps`` (Euclidean), first seen wins.

    Uses a uniform spatial hash with cell size ``merge_eps``, so the build
    is near-linear; candidates only come from the 3**dim neighboring cells.
    """
    if merge_eps < 0:
        raise ValueError("merge_eps must be >= 0")
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    mapping = np.empty(n, dtype=np.int64)
    uniques: list[np.ndarray] = []

    if merge_eps == 0.0:
        seen: dict[bytes, int] = {}
        for k in range(n):
            key = pts[k].tobytes()
            idx = seen.get(key)
            if idx is None:
                idx = len(uniques)
                seen[key] = idx
                uniques.append(pts[k])
            mapping[k] = idx
    else:
        dim = pts.shape[1]
        offsets = list(product((-1, 0, 1), repeat=dim))
        cells: dict[tuple, list[int]] = {}
        eps2 = merge_eps * merge_eps
        for k in range(n):
            p = pts[k]
            cell = tuple(np.floor(p / merge_eps).astype(np.int64))
            hit = -1
            for off in offsets:
                bucket = cells.get(tuple(c + o for c, o in zip(cell, off)))
                if not bucket:
                    continue
                for u in bucket:
                    d = uniques[u] - p
                    if float(d @ d) <= eps2:
                        hit = u
                        break
                if hit >= 0:
                    break
            if hit < 0:
                hit = len(uniques)
                uniques.append(p)
                cells.setdefault(cell, []).append(hit)
            mapping[k] = hit

    unique_arr = np.vstack(uniques) if uniques else pts.reshape(0, pts.shape[1] if pts.ndim == 2 else 0)
    return VertexIndexMap(unique_arr, mapping)


def dedup_vertices(mesh: NMesh, merge_eps: float = DEFAULT_MERGE_EPS) -> VertexIndexMap:
    return dedup_points(mesh.vertices, merge_eps)


def scatter_positions(
    vmap: VertexIndexMap, new_unique_positions: np.ndarray, mesh: NMesh
) -> NMesh:
    """Push updated unique-vertex positions back into the duplicated array.

    Topology is carried over untouched; the centroid cache is invalidated.
    """
    new_pos = np.asarray(new_unique_positions, dtype=np.float64)
    if new_pos.shape != vmap.unique_vertices.shape:
        raise ValueError(
            f"expected positions of shape {vmap.unique_vertices.shape}, got {new_pos.shape}"
        )
    return NMesh(mesh.dim, new_pos[vmap.render_to_unique], mesh.facets, mesh.normals)


def simplex_volume(points: np.ndarray) -> float:
    """Unsigned volume of a full-dimensional simplex (dim+1 points)."""
    pts = np.asarray(points, dtype=np.float64)
    dim = pts.shape[1]
    if pts.shape[0] != dim + 1:
        raise ValueError("a full simplex needs dim+1 points")
    return abs(float(np.linalg.det(pts[1:] - pts[0]))) / math.factorial(dim)


def facet_measure(points: np.ndarray) -> float:
    """(N-1)-dimensional measure of an (N-1)-simplex embedded in N-space."""
    pts = np.asarray(points, dtype=np.float64)
    span = pts[1:] - pts[0]
    gram = span @ span.T
    g = float(np.linalg.det(gram))
    if g < 0.0:
        g = 0.0
    return math.sqrt(g) / math.factorial(span.shape[0])


def enclosed_volume(mesh: NMesh, origin: np.ndarray | None = None) -> float:
    """Volume enclosed by a watertight mesh via signed facet cones."""
    if mesh.facet_count == 0:
        return 0.0
    o = mesh.vertices.mean(axis=0) if origin is None else np.asarray(origin, dtype=np.float64)
    corners = mesh.vertices[mesh.facets] - o  # (F, dim, dim)
    dets = np.linalg.det(corners)
    signs = np.sign(np.einsum("fd,fd->f", mesh.normals, facet_centroids(mesh) - o))
    return float(np.sum(signs * np.abs(dets))) / math.factorial(mesh.dim)


def compact_mesh(mesh: NMesh, extra_indices: Sequence[np.ndarray] = ()) -> tuple[NMesh, np.ndarray]:
    """Drop vertices not referenced by facets (or the given index arrays).

    Returns the compacted mesh and an old-to-new index table (-1 for
    dropped entries); the extra index arrays are not remapped here.
    """
    used = np.zeros(mesh.vertex_count, dtype=bool)
    if mesh.facet_count:
        used[mesh.facets.ravel()] = True
    for idx in extra_indices:
        if np.asarray(idx).size:
            used[np.asarray(idx, dtype=np.int64).ravel()] = True
    old_to_new = np.full(mesh.vertex_count, -1, dtype=np.int64)
    old_to_new[used] = np.arange(int(used.sum()))
    new_facets = old_to_new[mesh.facets] if mesh.facet_count else mesh.facets
    out = NMesh(mesh.dim, mesh.vertices[used], new_facets, mesh.normals)
    return out, old_to_new


def validate_mesh(mesh: NMesh, normal_tol: float = 1e-6, centroid_tol: float = 1e-9) -> None:
    """Raise ValueError when a mesh breaks its structural invariants."""
    if mesh.vertices.shape[1] != mesh.dim or mesh.facets.shape[1] != mesh.dim:
        raise ValueError("vertex or facet arrays do not match the mesh dimension")
    if mesh.normals.shape != (mesh.facet_count, mesh.dim):
        raise ValueError("normals must have one entry per facet")
    if not np.all(np.isfinite(mesh.vertices)):
        raise ValueError("vertex coordinates must be finite")
    if mesh.facet_count:
        if mesh.facets.min() < 0 or mesh.facets.max() >= mesh.vertex_count:
            raise ValueError("facet index out of range")
        lengths = np.linalg.norm(mesh.normals, axis=1)
        if np.any(np.abs(lengths - 1.0) > normal_tol):
            raise ValueError("facet normals must be unit length")
    if mesh.centroids is not None and mesh.facet_count:
        expect = mesh.vertices[mesh.facets].mean(axis=1)
        if np.max(np.abs(mesh.centroids - expect)) > centroid_tol:
            raise ValueError("cached centroids disagree with facet vertices")
