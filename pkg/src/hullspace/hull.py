"""Pruning-free N-dimensional Quickhull with interior tessellation.

The farthest point each round is found by a linear scan over one global
set of unprocessed points; no per-facet candidate lists are kept. Points
are only removed from that set when they become hull vertices, so interior
points are rescanned every round. In exchange the state management stays
trivial and the incremental cone volumes (new vertex over each visible
facet) tile the hull interior exactly, which is what the Boolean pipeline
and high-dimensional slicing reuse as a tessellation primitive.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .ga import wedge_normal
from .mesh import NMesh, bbox_diagonal, facet_centroids

__all__ = [
    "DegenerateInput",
    "NumericalFailure",
    "AmbiguousOrientation",
    "HullResult",
    "HullState",
    "initial_simplex",
    "orient_outward",
    "visible_facets",
    "hull_state",
    "build_hull",
    "hull_volume",
]

RELATIVE_EPS = 1e-9


class DegenerateInput(ValueError):
    """Input points do not span the full dimension."""


class NumericalFailure(RuntimeError):
    """A facet normal underflowed or orientation could not be resolved."""


class AmbiguousOrientation(RuntimeError):
    """Reference point lies on the facet plane, orientation undecidable."""


@dataclass
class HullResult:
    mesh: NMesh  # vertices are the full input point array
    simplices: np.ndarray  # (S, dim+1) int64, positively oriented
    interior_centroid: np.ndarray


@dataclass
class HullState:
    """Growing hull: per-facet vertex tuples with cached plane data."""

    dim: int
    points: np.ndarray
    facet_vertices: list[tuple[int, ...]]
    normals: np.ndarray  # (F, dim)
    offsets: np.ndarray  # (F,) normal . centroid
    centroids: np.ndarray  # (F, dim)
    interior_centroid: np.ndarray
    eps: float


def initial_simplex(points: np.ndarray, dim: int, eps: float | None = None) -> list[int]:
    """Greedy affinely independent seed: axis-0 extremes, then repeatedly
    the point farthest from the affine span so far."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, dim)
    n = pts.shape[0]
    if n < dim + 1:
        raise DegenerateInput(f"need at least {dim + 1} points, got {n}")
    diag = bbox_diagonal(pts)
    if diag == 0.0:
        raise DegenerateInput("all points coincide")
    if eps is None:
        eps = RELATIVE_EPS * diag

    chosen = [int(np.argmin(pts[:, 0]))]
    hi = int(np.argmax(pts[:, 0]))
    if hi != chosen[0]:
        chosen.append(hi)

    p0 = pts[chosen[0]]
    basis: list[np.ndarray] = []  # orthonormal directions of the affine span
    for idx in chosen[1:]:
        d = pts[idx] - p0
        d = d / np.linalg.norm(d)
        basis.append(d)

    while len(chosen) < dim + 1:
        rel = pts - p0
        if basis:
            q = np.vstack(basis)
            rel = rel - (rel @ q.T) @ q
        dist = np.linalg.norm(rel, axis=1)
        best = int(np.argmax(dist))
        if dist[best] <= eps:
            raise DegenerateInput(
                f"points span only {len(chosen) - 1} dimensions (residual {dist[best]:.3e})"
            )
        chosen.append(best)
        basis.append(rel[best] / dist[best])
    return chosen


def orient_outward(
    normal: np.ndarray,
    facet_centroid: np.ndarray,
    interior_centroid: np.ndarray,
    eps: float = 0.0,
) -> np.ndarray:
    """Flip the normal, if needed, so it points away from the interior.

    Outward means the dot product with (interior - facet point) is
    negative; a dot within ``eps`` of zero is ambiguous.
    """
    normal = np.asarray(normal, dtype=np.float64)
    d = float(normal @ (np.asarray(interior_centroid) - np.asarray(facet_centroid)))
    if abs(d) <= eps:
        raise AmbiguousOrientation("interior reference lies on the facet plane")
    return -normal if d > 0.0 else normal


def visible_facets(state: HullState, p_new: np.ndarray) -> np.ndarray:
    """Ids of facets whose outward side faces p_new (strictly, beyond eps)."""
    p = np.asarray(p_new, dtype=np.float64)
    return np.nonzero(state.normals @ p - state.offsets > state.eps)[0]


def hull_state(mesh: NMesh, interior_centroid: np.ndarray, eps: float | None = None) -> HullState:
    """View an existing hull mesh as a HullState for visibility queries."""
    cents = facet_centroids(mesh)
    if eps is None:
        eps = RELATIVE_EPS * bbox_diagonal(mesh.vertices)
    return HullState(
        dim=mesh.dim,
        points=mesh.vertices,
        facet_vertices=[tuple(f) for f in mesh.facets],
        normals=mesh.normals,
        offsets=np.einsum("fd,fd->f", mesh.normals, cents),
        centroids=cents,
        interior_centroid=np.asarray(interior_centroid, dtype=np.float64),
        eps=eps,
    )


def _wedge_rows(span: list[list[float]], dim: int) -> list[float]:
    """Hodge-dual normal from dim-1 spanning rows, plain Python floats."""
    if dim == 2:
        (ax, ay), = span
        return [ay, -ax]
    if dim == 3:
        (ax, ay, az), (bx, by, bz) = span
        return [ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx]
    if dim == 4:
        (a0, a1, a2, a3), (b0, b1, b2, b3), (c0, c1, c2, c3) = span
        # 2x2 minors of the last two rows, reused across the four cofactors
        m01 = b0 * c1 - b1 * c0
        m02 = b0 * c2 - b2 * c0
        m03 = b0 * c3 - b3 * c0
        m12 = b1 * c2 - b2 * c1
        m13 = b1 * c3 - b3 * c1
        m23 = b2 * c3 - b3 * c2
        return [
            a1 * m23 - a2 * m13 + a3 * m12,
            -(a0 * m23 - a2 * m03 + a3 * m02),
            a0 * m13 - a1 * m03 + a3 * m01,
            -(a0 * m12 - a1 * m02 + a2 * m01),
        ]
    return list(wedge_normal(np.asarray(span), dim))


def _facet_plane(pts_list: list[list[float]], verts: tuple[int, ...], interior, dim: int):
    """Unit outward normal, offset and centroid for a candidate facet.

    Operates on plain Python floats; this is the innermost routine of hull
    construction and of the Boolean clipping tessellation.
    """
    rows = [pts_list[v] for v in verts]
    if dim == 3:
        r0, r1, r2 = rows
        ax, ay, az = r1[0] - r0[0], r1[1] - r0[1], r1[2] - r0[2]
        bx, by, bz = r2[0] - r0[0], r2[1] - r0[1], r2[2] - r0[2]
        n = [ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx]
        cent = [
            (r0[0] + r1[0] + r2[0]) / 3.0,
            (r0[1] + r1[1] + r2[1]) / 3.0,
            (r0[2] + r1[2] + r2[2]) / 3.0,
        ]
    elif dim == 2:
        r0, r1 = rows
        n = [r1[1] - r0[1], r0[0] - r1[0]]
        cent = [(r0[0] + r1[0]) / 2.0, (r0[1] + r1[1]) / 2.0]
    else:
        base = rows[0]
        span = [[r[k] - base[k] for k in range(dim)] for r in rows[1:]]
        n = _wedge_rows(span, dim)
        cent = [sum(r[k] for r in rows) / dim for k in range(dim)]
    length = math.sqrt(sum(c * c for c in n))
    scale = max(max(abs(x) for r in rows for x in r), 1.0)
    if length <= 1e-14 * scale:
        raise NumericalFailure(f"facet normal underflowed for vertices {verts}")
    d = sum(nc * (ic - cc) for nc, cc, ic in zip(n, cent, interior))
    if d == 0.0:
        raise NumericalFailure("interior reference lies on the facet plane")
    flip = -length if d > 0.0 else length
    n = [c / flip for c in n]
    offset = sum(nc * cc for nc, cc in zip(n, cent))
    return n, offset, cent


def _orient_simplices(simplices: list[tuple[int, ...]], pts: np.ndarray, dim: int) -> np.ndarray:
    """Reorder each simplex tuple so its signed volume is positive."""
    simp = np.asarray(simplices, dtype=np.int64).reshape(-1, dim + 1)
    if simp.shape[0] == 0:
        return simp
    corners = pts[simp]
    dets = np.linalg.det(corners[:, 1:, :] - corners[:, :1, :])
    flip = dets < 0.0
    simp[flip, -2], simp[flip, -1] = simp[flip, -1].copy(), simp[flip, -2].copy()
    return simp


def build_hull(
    points: np.ndarray,
    dim: int | None = None,
    with_simplices: bool = True,
    eps: float | None = None,
) -> HullResult:
    """Convex hull plus (optionally) the interior simplex tessellation.

    The result mesh keeps the whole input array as its vertex set; facet
    tuples and simplex tuples index into it. Simplex tuples are ordered so
    their signed volume is positive.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("points must be a (n, dim) array")
    if dim is None:
        dim = pts.shape[1]
    if pts.shape[1] != dim:
        raise ValueError(f"points have dimension {pts.shape[1]}, expected {dim}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    if eps is None:
        eps = RELATIVE_EPS * bbox_diagonal(pts)

    seed = initial_simplex(pts, dim, eps)
    interior = pts[seed].mean(axis=0)
    interior_list = interior.tolist()
    pts_list = pts.tolist()
    npts = pts.shape[0]

    # Facet store: parallel lists indexed by a stable facet id. Plane data
    # lives in Python floats for the small-input paths and is mirrored into
    # growing numpy buffers for the vectorized scans on large inputs.
    facet_verts: list[tuple[int, ...]] = []
    fnormals: list[list[float]] = []
    foffsets: list[float] = []
    fcentroids: list[list[float]] = []
    alive: list[bool] = []
    big = npts > 48
    cap = 4 * (dim + 1)
    nrm_buf = np.empty((cap, dim)) if big else None
    off_buf = np.empty(cap) if big else None
    alive_buf = np.zeros(cap, dtype=bool) if big else None

    def add_facet(verts: tuple[int, ...]) -> int:
        nonlocal cap, nrm_buf, off_buf, alive_buf
        n, o, c = _facet_plane(pts_list, verts, interior_list, dim)
        fid = len(facet_verts)
        facet_verts.append(verts)
        fnormals.append(n)
        foffsets.append(o)
        fcentroids.append(c)
        alive.append(True)
        if big:
            if fid == cap:
                cap *= 2
                nrm_buf = np.vstack([nrm_buf, np.empty_like(nrm_buf)])
                off_buf = np.concatenate([off_buf, np.empty_like(off_buf)])
                alive_buf = np.concatenate([alive_buf, np.zeros_like(alive_buf)])
            nrm_buf[fid] = n
            off_buf[fid] = o
            alive_buf[fid] = True
        return fid

    queue: deque[int] = deque()
    for drop in range(dim + 1):
        verts = tuple(seed[k] for k in range(dim + 1) if k != drop)
        queue.append(add_facet(verts))

    simplices: list[tuple[int, ...]] = []
    if with_simplices:
        simplices.append(tuple(seed))

    seed_set = set(seed)
    unproc = [k for k in range(npts) if k not in seed_set]

    # Each popped facet scans the one global unprocessed set for its
    # farthest point; only points promoted to hull vertices ever leave
    # that set, so interior points are rescanned on later pops.
    while queue:
        fid = queue.popleft()
        if not alive[fid] or not unproc:
            continue
        n = fnormals[fid]
        off = foffsets[fid]
        if big:
            idx = np.asarray(unproc)
            d = pts[idx] @ np.asarray(n) - off
            pick = int(np.argmax(d))
            best = float(d[pick])
            p_idx = int(idx[pick])
        else:
            best = -math.inf
            p_idx = -1
            for k in unproc:
                row = pts_list[k]
                dk = sum(nc * rc for nc, rc in zip(n, row)) - off
                if dk > best:
                    best = dk
                    p_idx = k
        if best <= eps:
            continue  # nothing beyond this facet, it is final
        p = pts_list[p_idx]

        if big:
            pa = pts[p_idx]
            live_ids = np.nonzero(alive_buf[: len(facet_verts)])[0]
            vis = live_ids[nrm_buf[live_ids] @ pa - off_buf[live_ids] > eps].tolist()
        else:
            vis = [
                f
                for f in range(len(facet_verts))
                if alive[f]
                and sum(nc * pc for nc, pc in zip(fnormals[f], p)) - foffsets[f] > eps
            ]
        if fid not in vis:
            # Tolerance skew: the popped facet always counts as visible so
            # the chosen point is consumed.
            vis.append(fid)
            vis.sort()

        # Horizon: ridges used by exactly one visible facet.
        ridge_count: dict[tuple[int, ...], int] = {}
        ridge_rep: dict[tuple[int, ...], tuple[int, ...]] = {}
        for f in vis:
            verts = facet_verts[f]
            for drop in range(dim):
                ridge = verts[:drop] + verts[drop + 1 :]
                key = tuple(sorted(ridge))
                ridge_count[key] = ridge_count.get(key, 0) + 1
                ridge_rep[key] = ridge
        horizon = [ridge_rep[k] for k, c in sorted(ridge_count.items()) if c == 1]

        if with_simplices:
            for f in vis:
                simplices.append(facet_verts[f] + (p_idx,))

        for f in vis:
            alive[f] = False
        if big:
            alive_buf[vis] = False
        for ridge in horizon:
            queue.append(add_facet(ridge + (p_idx,)))
        unproc.remove(p_idx)

    live = [f for f in range(len(facet_verts)) if alive[f]]
    mesh = NMesh(
        dim,
        pts,
        np.asarray([facet_verts[f] for f in live], dtype=np.int64).reshape(-1, dim),
        np.asarray([fnormals[f] for f in live], dtype=np.float64).reshape(-1, dim),
        centroids=np.asarray([fcentroids[f] for f in live], dtype=np.float64).reshape(-1, dim),
    )
    simp = (
        _orient_simplices(simplices, pts, dim)
        if with_simplices
        else np.zeros((0, dim + 1), dtype=np.int64)
    )
    return HullResult(mesh=mesh, simplices=simp, interior_centroid=interior)


def hull_volume(result: HullResult) -> float:
    """Sum of the interior simplex volumes."""
    if result.simplices.size == 0:
        return 0.0
    dim = result.mesh.dim
    corners = result.mesh.vertices[result.simplices]
    dets = np.linalg.det(corners[:, 1:, :] - corners[:, :1, :])
    return float(np.sum(np.abs(dets))) / math.factorial(dim)
