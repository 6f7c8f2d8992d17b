"""Boolean operations (union, intersection, difference) on watertight
simplicial meshes in three and four dimensions.

Four stages:

1. broad phase: a uniform spatial grid over facet bounding boxes prunes
   the facet pairs worth testing;
2. narrow phase: a dimension-generalized two-plane test (clip each facet
   by the other's hyperplane, then check the two cut regions for overlap
   inside their shared (N-2)-space) fills a symmetric intersection
   register;
3. tessellation: every registered facet is clipped by each partner's
   hyperplane in turn; cut vertices go through two-stage merging (unify
   nearby cut points, then snap onto nearby original vertices) and the
   pieces on either side are re-tessellated through the hull kernel's
   interior simplex output;
4. classification: each output piece is kept or dropped by a parity ray
   cast against the opposing mesh, with near-coincident hits grouped into
   events and classified piercing or tangent by the sign pattern of the
   facet normals; degenerate configurations retry with a deterministic
   perturbed ray origin.

Facets of one mesh lying exactly on the other mesh's surface cannot be
settled by parity (the ray starts on a surface); they are detected up
front and kept or dropped by normal agreement, which is what makes
self-union and self-intersection exact.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .hull import DegenerateInput, NumericalFailure, build_hull
from .mesh import (
    NMesh,
    dedup_points,
    empty_mesh,
    facet_centroids,
    facet_measure,
    mesh_aabb,
    points_aabb,
)

__all__ = [
    "BooleanKind",
    "CoplanarPair",
    "ClassificationFailure",
    "Tolerances",
    "SpatialGrid",
    "IntersectionRegister",
    "IntersectionEvent",
    "broad_phase",
    "facet_facet_intersect",
    "clip_and_tessellate",
    "classify_facet",
    "boolean_op",
]


class BooleanKind(enum.Enum):
    UNION = "union"
    INTERSECTION = "intersection"
    DIFFERENCE = "difference"


class CoplanarPair(Exception):
    """The two facets span the same hyperplane."""


class ClassificationFailure(RuntimeError):
    """Inside/outside test stayed degenerate through all ray perturbations."""


EPS_DOT = 1e-9
MAX_PERTURB = 8
BARY_EPS = 1e-9


@dataclass(frozen=True)
class Tolerances:
    """Scale-relative tolerances shared by the pipeline stages."""

    diag: float
    merge_eps: float  # stage-1 unification of cut vertices
    snap_eps: float  # stage-2 snap of cut vertices onto facet vertices
    group_eps: float  # ray-hit event grouping
    ray_margin: float  # ray endpoint beyond the opposing AABB
    perturb: float  # ray-origin perturbation magnitude

    @classmethod
    def for_diagonal(cls, diag: float) -> "Tolerances":
        d = max(diag, 1e-300)
        return cls(
            diag=d,
            merge_eps=1e-7 * d,
            snap_eps=1e-6 * d,
            group_eps=1e-6 * d,
            ray_margin=1e-3 * d,
            perturb=1e-5 * d,
        )

    @classmethod
    def for_meshes(cls, *meshes: NMesh) -> "Tolerances":
        pts = np.vstack([m.vertices for m in meshes if m.vertex_count])
        if pts.size == 0:
            return cls.for_diagonal(1.0)
        box = points_aabb(pts)
        return cls.for_diagonal(float(np.linalg.norm(box.max - box.min)))


# ---------------------------------------------------------------------------
# Stage 1: broad phase.


@dataclass
class SpatialGrid:
    """Uniform grid mapping integer cells to the facet ids whose AABBs
    touch them."""

    cell_size: float
    cells: dict[tuple[int, ...], list[int]] = field(default_factory=dict)

    @classmethod
    def build(cls, mesh: NMesh, cell_size: float) -> "SpatialGrid":
        grid = cls(cell_size=cell_size)
        inv = 1.0 / cell_size
        corners = mesh.vertices[mesh.facets]  # (F, dim, dim)
        lo = np.floor(corners.min(axis=1) * inv).astype(np.int64)
        hi = np.floor(corners.max(axis=1) * inv).astype(np.int64)
        for f in range(mesh.facet_count):
            ranges = [range(lo[f, k], hi[f, k] + 1) for k in range(mesh.dim)]
            _register(grid.cells, ranges, f)
        return grid


def _register(cells, ranges, f, prefix=()):
    if not ranges:
        cells.setdefault(prefix, []).append(f)
        return
    for c in ranges[0]:
        _register(cells, ranges[1:], f, prefix + (c,))


def _mean_facet_extent(mesh: NMesh) -> float:
    corners = mesh.vertices[mesh.facets]
    spans = corners.max(axis=1) - corners.min(axis=1)
    return float(spans.max(axis=1).mean())


def broad_phase(mesh_a: NMesh, mesh_b: NMesh) -> list[tuple[int, int]]:
    """Candidate facet pairs: share a grid cell and have overlapping AABBs.

    The cell size is the mean facet-AABB longest extent over both meshes,
    which keeps expected cell occupancy near constant without a hierarchy.
    """
    if mesh_a.dim != mesh_b.dim:
        raise ValueError("meshes must share a dimension")
    if mesh_a.is_empty() or mesh_b.is_empty():
        return []
    cell = 0.5 * (_mean_facet_extent(mesh_a) + _mean_facet_extent(mesh_b))
    if cell <= 0.0:
        cell = 1.0
    grid = SpatialGrid.build(mesh_a, cell)
    inv = 1.0 / cell

    corners_b = mesh_b.vertices[mesh_b.facets]
    lo_b = corners_b.min(axis=1)
    hi_b = corners_b.max(axis=1)
    corners_a = mesh_a.vertices[mesh_a.facets]
    lo_a = corners_a.min(axis=1)
    hi_a = corners_a.max(axis=1)

    pairs: set[tuple[int, int]] = set()
    lo_cells = np.floor(lo_b * inv).astype(np.int64)
    hi_cells = np.floor(hi_b * inv).astype(np.int64)
    for fb in range(mesh_b.facet_count):
        seen: set[int] = set()
        ranges = [range(lo_cells[fb, k], hi_cells[fb, k] + 1) for k in range(mesh_b.dim)]
        _collect(grid.cells, ranges, seen)
        for fa in seen:
            if np.all(lo_a[fa] <= hi_b[fb]) and np.all(lo_b[fb] <= hi_a[fa]):
                pairs.add((fa, fb))
    return sorted(pairs)


def _collect(cells, ranges, out, prefix=()):
    if not ranges:
        bucket = cells.get(prefix)
        if bucket:
            out.update(bucket)
        return
    for c in ranges[0]:
        _collect(cells, ranges[1:], out, prefix + (c,))


# ---------------------------------------------------------------------------
# Stage 2: narrow phase.


@dataclass
class IntersectionRegister:
    """Symmetric record of which facets cut which on the opposite mesh."""

    a_to_b: dict[int, list[int]] = field(default_factory=dict)
    b_to_a: dict[int, list[int]] = field(default_factory=dict)

    def add(self, fa: int, fb: int) -> None:
        self.a_to_b.setdefault(fa, []).append(fb)
        self.b_to_a.setdefault(fb, []).append(fa)


def _plane_of(verts: np.ndarray) -> tuple[np.ndarray, float]:
    """Unit normal and offset of the hyperplane spanned by a simplex facet."""
    from .ga import wedge_normal

    span = verts[1:] - verts[0]
    n = wedge_normal(span, verts.shape[1])
    length = float(np.linalg.norm(n))
    if length <= 1e-14 * max(float(np.abs(verts).max()), 1.0):
        raise NumericalFailure("degenerate facet has no hyperplane")
    n = n / length
    return n, float(n @ verts.mean(axis=0))


def _plane_section(verts: np.ndarray, signed: np.ndarray, eps: float) -> np.ndarray:
    """Points where a simplex meets the zero set of ``signed`` distances."""
    pts = []
    k = verts.shape[0]
    for i in range(k):
        if abs(signed[i]) <= eps:
            pts.append(verts[i])
    for i in range(k):
        for j in range(i + 1, k):
            si, sj = signed[i], signed[j]
            if (si > eps and sj < -eps) or (si < -eps and sj > eps):
                t = si / (si - sj)
                pts.append(verts[i] + t * (verts[j] - verts[i]))
    if not pts:
        return np.zeros((0, verts.shape[1]))
    return np.vstack(pts)


def _order_polygon_2d(pts2: np.ndarray) -> np.ndarray:
    """Convex ordering of 2D points around their centroid (cross signs)."""
    if pts2.shape[0] <= 2:
        return pts2
    c = pts2.mean(axis=0)
    u = pts2 - c
    axis = u[0]
    upper, lower = [], []
    for i in range(pts2.shape[0]):
        s = axis[0] * u[i][1] - axis[1] * u[i][0]
        if s > 0.0 or (s == 0.0 and float(u[i] @ axis) >= 0.0):
            upper.append(i)
        else:
            lower.append(i)

    def insertion(ids):
        out: list[int] = []
        for i in ids:
            pos = len(out)
            for p, j in enumerate(out):
                if u[i][0] * u[j][1] - u[i][1] * u[j][0] > 0.0:
                    pos = p
                    break
            out.insert(pos, i)
        return out

    return pts2[insertion(upper) + insertion(lower)]


def _sat_overlap(poly_a: np.ndarray, poly_b: np.ndarray, eps: float) -> bool:
    """Separating-axis test for convex 2D point sets (inclusive by eps)."""

    def axes(poly):
        out = []
        k = poly.shape[0]
        if k < 2:
            return out
        for i in range(k if k > 2 else 1):
            e = poly[(i + 1) % k] - poly[i]
            L = math.hypot(e[0], e[1])
            if L > 0.0:
                out.append((-e[1] / L, e[0] / L))
        return out

    all_axes = axes(poly_a) + axes(poly_b)
    if not all_axes:
        return bool(np.linalg.norm(poly_a[0] - poly_b[0]) <= eps)
    for ax in all_axes:
        pa = poly_a @ ax
        pb = poly_b @ ax
        if pa.min() > pb.max() + eps or pb.min() > pa.max() + eps:
            return False
    return True


def _clip_polygon_halfplane(poly: np.ndarray, n: np.ndarray, d: float, eps: float) -> np.ndarray:
    """Sutherland-Hodgman step: keep the side with n . p <= d."""
    k = poly.shape[0]
    if k == 0:
        return poly
    s = poly @ n - d
    if np.all(s <= eps):
        return poly
    if np.all(s >= -eps):
        return poly[s <= eps]
    out = []
    for i in range(k):
        j = (i + 1) % k
        si, sj = s[i], s[j]
        if si <= eps:
            out.append(poly[i])
        if (si < -eps and sj > eps) or (si > eps and sj < -eps):
            t = si / (si - sj)
            out.append(poly[i] + t * (poly[j] - poly[i]))
        if k == 2:
            break  # a segment has a single edge
    if not out:
        return np.zeros((0, 2))
    return np.vstack(out)


def _overlap_region_2d(poly_a: np.ndarray, poly_b: np.ndarray, eps: float) -> np.ndarray:
    """Intersection of two convex regions given as ordered 2D point sets."""
    if poly_b.shape[0] >= 3:
        clipper, subject = poly_b, poly_a
    else:
        clipper, subject = poly_a, poly_b
    if clipper.shape[0] < 3:
        # two segments/points: project onto the longer segment's direction
        base = clipper if clipper.shape[0] == 2 else subject
        if base.shape[0] < 2:
            return clipper.reshape(-1, 2)
        e = base[1] - base[0]
        L = float(np.linalg.norm(e))
        if L == 0.0:
            return base[:1]
        e = e / L
        ta = np.sort((poly_a - base[0]) @ e)
        tb = np.sort((poly_b - base[0]) @ e)
        lo, hi = max(ta[0], tb[0]), min(ta[-1], tb[-1])
        if lo > hi + eps:
            return np.zeros((0, 2))
        return np.vstack([base[0] + lo * e, base[0] + hi * e])
    region = subject
    k = clipper.shape[0]
    for i in range(k):
        a, b = clipper[i], clipper[(i + 1) % k]
        edge = b - a
        n = np.array([-edge[1], edge[0]])
        L = float(np.linalg.norm(n))
        if L == 0.0:
            continue
        n /= L
        c = clipper.mean(axis=0)
        if float(n @ (c - a)) > 0.0:
            n = -n  # keep the clipper's interior side
        region = _clip_polygon_halfplane(region, n, float(n @ a), eps)
        if region.shape[0] == 0:
            return region
    return region


def _common_space_basis(n_a: np.ndarray, n_b: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis (rows) of the (N-2)-space orthogonal to both normals."""
    m = np.vstack([n_a, n_b])
    _, _, vh = np.linalg.svd(m, full_matrices=True)
    return vh[2:dim]


def facet_facet_intersect(
    verts_a: np.ndarray,
    verts_b: np.ndarray,
    dim: int,
    tol: Tolerances | None = None,
) -> np.ndarray | None:
    """Overlap region of two simplex facets, or None when they miss.

    Splits into two symmetric half-problems: each facet is cut by the
    hyperplane of the other, and the two cut regions (segments in 3D,
    convex polygons in 4D) are compared in the (N-2)-space common to both
    hyperplanes: interval overlap in 3D, separating-axis plus polygon
    clipping in 4D. Touching contacts count as intersections.

    Raises CoplanarPair when the facets span the same hyperplane.
    """
    if dim not in (3, 4):
        raise ValueError(f"facet intersection supports dimensions 3 and 4, got {dim}")
    va = np.asarray(verts_a, dtype=np.float64).reshape(dim, dim)
    vb = np.asarray(verts_b, dtype=np.float64).reshape(dim, dim)
    if tol is None:
        tol = Tolerances.for_diagonal(float(np.linalg.norm(np.vstack([va, vb]).ptp(axis=0))))
    eps = tol.snap_eps

    n_a, d_a = _plane_of(va)
    n_b, d_b = _plane_of(vb)
    s_b = vb @ n_a - d_a
    s_a = va @ n_b - d_b
    if np.all(np.abs(s_b) <= eps) and np.all(np.abs(s_a) <= eps):
        raise CoplanarPair
    if np.all(s_b > eps) or np.all(s_b < -eps):
        return None
    if np.all(s_a > eps) or np.all(s_a < -eps):
        return None

    region_b = _plane_section(vb, s_b, eps)  # plane(A) cut through B
    region_a = _plane_section(va, s_a, eps)  # plane(B) cut through A
    if region_a.shape[0] == 0 or region_b.shape[0] == 0:
        return None

    basis = _common_space_basis(n_a, n_b, dim)
    origin = region_b[0]
    pa = (region_a - origin) @ basis.T
    pb = (region_b - origin) @ basis.T

    if dim == 3:
        ta = np.sort(pa[:, 0])
        tb = np.sort(pb[:, 0])
        lo, hi = max(ta[0], tb[0]), min(ta[-1], tb[-1])
        if lo > hi + eps:
            return None
        return np.vstack([origin + lo * basis[0], origin + hi * basis[0]])

    pa = _order_polygon_2d(pa)
    pb = _order_polygon_2d(pb)
    if not _sat_overlap(pa, pb, eps):
        return None
    region = _overlap_region_2d(pa, pb, eps)
    if region.shape[0] == 0:
        return None
    return origin + region @ basis


# ---------------------------------------------------------------------------
# Stage 3: clip and re-tessellate.


def clip_and_tessellate(
    facet: np.ndarray,
    clip_plane: tuple[np.ndarray, float],
    eps_pair: tuple[float, float],
    basis: np.ndarray | None = None,
) -> tuple[list[np.ndarray], int]:
    """Split one simplex facet by a hyperplane into simplex pieces.

    Returns (pieces, dropped): each piece is an (N, N) vertex array
    coplanar with the input facet; ``dropped`` counts zero-measure pieces
    discarded during re-tessellation. A facet whose vertices all lie on
    one side (on-plane vertices count as either side) is returned as is.

    Cut vertices are merged pairwise within ``merge_eps`` and then snapped
    onto any original facet vertex within ``snap_eps``, keeping the piece
    topology consistent with the untouched neighbors.

    ``basis`` optionally carries the facet plane's orthonormal basis
    (columns) to avoid recomputing it for repeated clips of one parent.
    """
    merge_eps, snap_eps = eps_pair
    verts = np.asarray(facet, dtype=np.float64)
    dim = verts.shape[1]
    n, d = clip_plane
    s = verts @ n - d

    pos_mask = s > snap_eps
    neg_mask = s < -snap_eps
    if not pos_mask.any() or not neg_mask.any():
        return [verts], 0

    cuts = []
    for i in range(dim):
        if abs(s[i]) <= snap_eps:
            cuts.append(verts[i])
    for i in range(dim):
        for j in range(i + 1, dim):
            if (pos_mask[i] and neg_mask[j]) or (neg_mask[i] and pos_mask[j]):
                t = s[i] / (s[i] - s[j])
                cuts.append(verts[i] + t * (verts[j] - verts[i]))

    # stage 1: unify cut vertices that numeric noise split apart
    merged: list[np.ndarray] = []
    for p in cuts:
        if all(float(np.linalg.norm(p - q)) > merge_eps for q in merged):
            merged.append(p)
    # stage 2: snap cut vertices onto original facet vertices
    snapped: list[np.ndarray] = []
    for p in merged:
        dist = np.linalg.norm(verts - p, axis=1)
        k = int(np.argmin(dist))
        if dist[k] <= snap_eps:
            p = verts[k].copy()
        if all(np.any(p != q) for q in snapped):
            snapped.append(p)

    if basis is None:
        basis = np.linalg.qr((verts[1:] - verts[0]).T)[0]

    dropped = 0
    pieces: list[np.ndarray] = []
    for side_mask in (pos_mask, neg_mask):
        side_pts = [verts[i] for i in range(dim) if side_mask[i]]
        group = side_pts + snapped
        if len(group) < dim:
            dropped += 1
            continue
        coords = np.vstack(group)
        if len(group) == dim:
            if facet_measure(coords) > 0.0:
                pieces.append(coords)
            else:
                dropped += 1
            continue
        proj = (coords - verts[0]) @ basis
        try:
            result = build_hull(proj, dim=dim - 1)
        except (DegenerateInput, NumericalFailure):
            dropped += 1
            continue
        for simplex in result.simplices:
            piece = coords[simplex]
            if facet_measure(piece) > 0.0:
                pieces.append(piece)
            else:
                dropped += 1
    return pieces, dropped


# ---------------------------------------------------------------------------
# Stage 4: parity classification.


@dataclass
class IntersectionEvent:
    """Grouped ray-facet hits treated as one crossing candidate."""

    position: np.ndarray
    member_facets: list[int]
    kind: str  # "piercing" | "tangent"


class _MeshProbe:
    """Precomputed plane data and barycentric solvers for ray queries."""

    def __init__(self, mesh: NMesh, tol: Tolerances):
        self.mesh = mesh
        self.tol = tol
        self.dim = mesh.dim
        if mesh.facet_count:
            corners = mesh.vertices[mesh.facets]
            self.v0 = corners[:, 0, :]
            spans = corners[:, 1:, :] - corners[:, :1, :]
            self.pinv = np.linalg.pinv(spans.transpose(0, 2, 1))
            cents = facet_centroids(mesh)
            normals = mesh.normals
            self.normals = normals
            self.offsets = np.einsum("fd,fd->f", normals, cents)
            self.lo = corners.min(axis=1)
            self.hi = corners.max(axis=1)
            box = mesh_aabb(mesh)
            self.max_x = float(box.max[0])
        else:
            self.max_x = -math.inf

    def candidates(self, origin: np.ndarray) -> np.ndarray:
        """Facets whose AABB contains the +x ray line through origin."""
        pad = self.tol.group_eps
        ok = np.all(self.lo[:, 1:] <= origin[1:] + pad, axis=1)
        ok &= np.all(self.hi[:, 1:] >= origin[1:] - pad, axis=1)
        ok &= self.hi[:, 0] >= origin[0] - pad
        return np.nonzero(ok)[0]


def _ray_events(probe: _MeshProbe, origin: np.ndarray, t_max: float):
    """Hits of the +x ray against the mesh, grouped into events.

    Returns (events, degenerate): ``degenerate`` is True when any event
    member runs within EPS_DOT of parallel to the ray, or a coplanar
    facet shadows the ray, both of which demand a perturbation retry.
    """
    tol = probe.tol
    cand = probe.candidates(origin)
    if cand.size == 0:
        return [], False
    nx = probe.normals[cand, 0]
    num = probe.offsets[cand] - probe.normals[cand] @ origin
    hits_t: list[float] = []
    hits_f: list[int] = []
    degenerate = False
    for k in range(cand.size):
        f = int(cand[k])
        if abs(nx[k]) < 1e-12:
            if abs(num[k]) <= tol.group_eps:
                # ray runs inside this facet's hyperplane
                return [], True
            continue
        t = num[k] / nx[k]
        if t < 0.0 or t > t_max:
            continue
        q = origin.copy()
        q[0] += t
        lam = probe.pinv[f] @ (q - probe.v0[f])
        if lam.min() < -BARY_EPS or lam.sum() > 1.0 + BARY_EPS:
            continue
        hits_t.append(t)
        hits_f.append(f)
    if not hits_t:
        return [], False

    order = np.argsort(hits_t, kind="stable")
    events: list[IntersectionEvent] = []
    cur_t: list[float] = []
    cur_f: list[int] = []
    for idx in order:
        t = hits_t[idx]
        if cur_t and t - cur_t[-1] > tol.group_eps:
            events.append(_finish_event(probe, origin, cur_t, cur_f))
            cur_t, cur_f = [], []
        cur_t.append(t)
        cur_f.append(hits_f[idx])
    events.append(_finish_event(probe, origin, cur_t, cur_f))

    for ev in events:
        for f in ev.member_facets:
            if abs(probe.normals[f, 0]) < EPS_DOT:
                return events, True
    return events, False


def _finish_event(probe, origin, ts, fs) -> IntersectionEvent:
    pos = origin.copy()
    pos[0] += float(np.mean(ts))
    signs = probe.normals[fs, 0]
    if np.all(signs >= 0.0) or np.all(signs <= 0.0):
        kind = "piercing"
    else:
        kind = "tangent"
    return IntersectionEvent(position=pos, member_facets=list(fs), kind=kind)


def classify_facet(
    facet_centroid: np.ndarray,
    other: NMesh | _MeshProbe,
    tol: Tolerances | None = None,
    seed: int = 0,
) -> str:
    """Parity test: 'inside' or 'outside' the opposing mesh.

    Casts a +x ray from the centroid to just beyond the opposing AABB and
    counts piercing events (odd = inside). The caller must keep centroids
    off the opposing surface; coincident geometry belongs to the
    on-surface path, not here. Degenerate rays retry up to MAX_PERTURB
    times from a deterministically perturbed origin (seeded by ``seed``),
    so results are reproducible.
    """
    if isinstance(other, _MeshProbe):
        probe = other
    else:
        probe = _MeshProbe(other, tol or Tolerances.for_meshes(other))
    tol = probe.tol
    origin0 = np.asarray(facet_centroid, dtype=np.float64)
    if probe.max_x == -math.inf:
        return "outside"

    for attempt in range(MAX_PERTURB + 1):
        if attempt == 0:
            origin = origin0
        else:
            rng = np.random.default_rng((seed & 0xFFFFFFFF) * 131 + attempt)
            offset = rng.normal(size=origin0.shape[0])
            offset[0] = 0.0  # shifting along the ray changes nothing
            norm = float(np.linalg.norm(offset))
            if norm == 0.0:
                continue
            origin = origin0 + offset * (tol.perturb / norm)
        t_max = probe.max_x - float(origin[0]) + tol.ray_margin
        if t_max < 0.0:
            return "outside"
        events, degenerate = _ray_events(probe, origin, t_max)
        if degenerate:
            continue
        crossings = sum(1 for ev in events if ev.kind == "piercing")
        return "inside" if crossings % 2 == 1 else "outside"
    raise ClassificationFailure(
        f"ray stayed degenerate after {MAX_PERTURB} perturbations (seed {seed})"
    )


# ---------------------------------------------------------------------------
# Assembly.


def _on_surface(q: np.ndarray, probe: _MeshProbe, normal: np.ndarray) -> str | None:
    """'same'/'opposite' when q lies on the opposing surface, else None."""
    if probe.mesh.facet_count == 0:
        return None
    tol = probe.tol
    dist = probe.normals @ q - probe.offsets
    near = np.nonzero(np.abs(dist) <= tol.group_eps)[0]
    for f in near:
        lam = probe.pinv[f] @ (q - probe.v0[f])
        if lam.min() >= -1e-7 and lam.sum() <= 1.0 + 1e-7:
            return "same" if float(probe.normals[f] @ normal) > 0.0 else "opposite"
    return None


def _clip_mesh_facets(mesh: NMesh, partner: NMesh, register: dict[int, list[int]], tol):
    """Sequentially clip registered facets by their partners' hyperplanes.

    Returns (pieces, piece_normals, piece_sources, dropped_count); facets
    without registered partners pass through whole.
    """
    eps_pair = (tol.merge_eps, tol.snap_eps)
    plane_cache: dict[int, tuple[np.ndarray, float]] = {}
    pieces: list[np.ndarray] = []
    normals: list[np.ndarray] = []
    sources: list[int] = []
    dropped = 0
    for f in range(mesh.facet_count):
        verts = mesh.vertices[mesh.facets[f]]
        partners = register.get(f)
        if not partners:
            pieces.append(verts)
            normals.append(mesh.normals[f])
            sources.append(f)
            continue
        basis = np.linalg.qr((verts[1:] - verts[0]).T)[0]
        current = [verts]
        for pid in sorted(partners):
            plane = plane_cache.get(pid)
            if plane is None:
                plane = _plane_of(partner.vertices[partner.facets[pid]])
                plane_cache[pid] = plane
            nxt: list[np.ndarray] = []
            for piece in current:
                out, d = clip_and_tessellate(piece, plane, eps_pair, basis=basis)
                dropped += d
                nxt.extend(out)
            current = nxt
        for piece in current:
            pieces.append(piece)
            normals.append(mesh.normals[f])
            sources.append(f)
    return pieces, normals, sources, dropped


def boolean_op(mesh_a: NMesh, mesh_b: NMesh, kind: BooleanKind) -> NMesh:
    """Union, intersection or difference of two watertight meshes.

    Both meshes must share a dimension in {3, 4} and carry outward unit
    normals. The result reuses the input normals (flipped for the
    difference's B-side walls) and welds coincident vertices; an empty
    mesh is a valid outcome.
    """
    if isinstance(kind, str):
        kind = BooleanKind(kind)
    if mesh_a.dim != mesh_b.dim:
        raise ValueError("meshes must share a dimension")
    dim = mesh_a.dim
    if dim not in (3, 4):
        raise ValueError(f"Boolean operations support dimensions 3 and 4, got {dim}")
    tol = Tolerances.for_meshes(mesh_a, mesh_b)

    register = IntersectionRegister()
    for fa, fb in broad_phase(mesh_a, mesh_b):
        va = mesh_a.vertices[mesh_a.facets[fa]]
        vb = mesh_b.vertices[mesh_b.facets[fb]]
        try:
            region = facet_facet_intersect(va, vb, dim, tol)
        except CoplanarPair:
            continue  # coincident facets go through the on-surface path
        if region is not None:
            register.add(fa, fb)

    pieces_a, normals_a, _, dropped_a = _clip_mesh_facets(mesh_a, mesh_b, register.a_to_b, tol)
    pieces_b, normals_b, _, dropped_b = _clip_mesh_facets(mesh_b, mesh_a, register.b_to_a, tol)

    probe_a = _MeshProbe(mesh_a, tol)
    probe_b = _MeshProbe(mesh_b, tol)

    kept_verts: list[np.ndarray] = []
    kept_normals: list[np.ndarray] = []

    def keep(piece: np.ndarray, normal: np.ndarray, flip: bool = False) -> None:
        kept_verts.append(piece)
        kept_normals.append(-normal if flip else normal)

    for idx, (piece, normal) in enumerate(zip(pieces_a, normals_a)):
        centroid = piece.mean(axis=0)
        surf = _on_surface(centroid, probe_b, normal)
        if surf is not None:
            if kind in (BooleanKind.UNION, BooleanKind.INTERSECTION) and surf == "same":
                keep(piece, normal)
            elif kind is BooleanKind.DIFFERENCE and surf == "opposite":
                keep(piece, normal)
            continue
        side = classify_facet(centroid, probe_b, seed=idx)
        if kind is BooleanKind.INTERSECTION:
            if side == "inside":
                keep(piece, normal)
        else:  # union and difference keep A's outside walls
            if side == "outside":
                keep(piece, normal)

    for idx, (piece, normal) in enumerate(zip(pieces_b, normals_b)):
        centroid = piece.mean(axis=0)
        if _on_surface(centroid, probe_a, normal) is not None:
            continue  # A's coincident copy already represents this wall
        side = classify_facet(centroid, probe_a, seed=1_000_000 + idx)
        if kind is BooleanKind.UNION:
            if side == "outside":
                keep(piece, normal)
        elif kind is BooleanKind.INTERSECTION:
            if side == "inside":
                keep(piece, normal)
        else:  # difference: B's walls inside A close the cut, flipped
            if side == "inside":
                keep(piece, normal, flip=True)

    if not kept_verts:
        return empty_mesh(dim)
    soup = np.vstack(kept_verts)
    vmap = dedup_points(soup, tol.merge_eps)
    facets = vmap.render_to_unique.reshape(-1, dim)
    return NMesh(dim, vmap.unique_vertices, facets, np.vstack(kept_normals).reshape(-1, dim))
