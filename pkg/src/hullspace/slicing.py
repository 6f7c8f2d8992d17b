"""Cross-sections of 4D meshes by an axis-parallel hyperplane.

The camera transform moves the scene so the clipping hyperplane is always
w = w_slice in the viewer frame; slicing then reduces to clipping every
tetrahedral facet by a constant-w plane. Each facet contributes a triangle
or a convex quadrilateral, which is fan-split after a trigonometry-free
angular sort around its centroid. Winding is repaired against the source
facet's normal so renderers see consistently oriented faces.

Sections in five or more dimensions are polytopes rather than polygons;
``tessellate_polytope`` hands those to the hull kernel, whose interior
simplex output decomposes them without any dimension-specific code.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ga import CameraState, transform_points, view_basis
from .hull import build_hull
from .mesh import NMesh

__all__ = [
    "CrossSection",
    "max_section_vertices",
    "slice_facet",
    "tessellate_section",
    "slice_mesh",
    "tessellate_polytope",
    "section_volume",
    "section_to_obj",
]

EPS_W_REL = 1e-9
EPS_AREA_REL = 1e-12


@dataclass
class CrossSection:
    """3D triangle soup with per-triangle provenance."""

    vertices: np.ndarray  # (M, 3)
    triangles: np.ndarray  # (T, 3) int64
    source_facet_ids: np.ndarray  # (T,) int64

    @property
    def triangle_count(self) -> int:
        return self.triangles.shape[0]

    def is_empty(self) -> bool:
        return self.triangle_count == 0


def empty_section() -> CrossSection:
    return CrossSection(
        np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64), np.zeros(0, dtype=np.int64)
    )


def max_section_vertices(n: int) -> int:
    """Most vertices a hyperplane can cut from an (N-1)-simplex facet."""
    if n < 3:
        raise ValueError(f"dimension must be at least 3, got {n}")
    return (n // 2) * ((n + 1) // 2)


def slice_facet(verts: np.ndarray, w_slice: float, eps_w: float | None = None) -> np.ndarray:
    """Intersection points of one tetrahedral 4D facet with w = w_slice.

    Returns 0, 3 or 4 points (one per sign-crossing edge), each with
    w-coordinate equal to w_slice up to interpolation error. A vertex
    within ``eps_w`` of the plane counts as lying on the positive side, so
    grazing contacts do not emit duplicate section vertices.
    """
    v = np.asarray(verts, dtype=np.float64)
    if v.shape != (4, 4):
        raise ValueError(f"expected a (4, 4) facet, got {v.shape}")
    w = v[:, 3]
    if eps_w is None:
        eps_w = EPS_W_REL * max(float(np.abs(w - w_slice).max()), 1.0)
    s = w - w_slice
    positive = s > -eps_w
    if np.all(positive) or not np.any(positive):
        return np.zeros((0, 4))
    points = []
    for i in range(4):
        for j in range(i + 1, 4):
            if positive[i] == positive[j]:
                continue
            dw = w[j] - w[i]
            if dw == 0.0:
                continue  # coplanar edge, endpoints covered by the vertex rule
            t = (w_slice - w[i]) / dw
            t = min(max(t, 0.0), 1.0)
            points.append(v[i] + t * (v[j] - v[i]))
    return np.asarray(points).reshape(-1, 4)


def _half_and_order(u: np.ndarray, axis: np.ndarray, ref: np.ndarray):
    side = float(np.cross(axis, u) @ ref)
    if side == 0.0:
        return 0 if float(u @ axis) >= 0.0 else 1
    return 0 if side > 0.0 else 1


def tessellate_section(points: np.ndarray, reference_normal: np.ndarray) -> list[tuple[int, int, int]]:
    """Fan-triangulate 3 or 4 coplanar points with consistent winding.

    The angular sort around the centroid uses only cross-product signs:
    points split into two half-planes about a fixed in-plane axis, then
    order within each half by the pairwise cross sign. Triangles whose
    normal opposes ``reference_normal`` get their winding reversed.
    Degenerate inputs (area below tolerance) produce no triangles.
    """
    pts = np.asarray(points, dtype=np.float64)
    ref = np.asarray(reference_normal, dtype=np.float64)
    k = pts.shape[0]
    if k < 3:
        return []
    c = pts.mean(axis=0)
    u = pts - c
    scale = float(np.abs(u).max())
    if scale == 0.0:
        return []
    eps_area = EPS_AREA_REL * scale * scale

    axis = u[0]
    halves: tuple[list[int], list[int]] = ([], [])
    for i in range(k):
        halves[_half_and_order(u[i], axis, ref)].append(i)

    def sort_half(ids: list[int]) -> list[int]:
        out: list[int] = []
        for i in ids:
            pos = len(out)
            for p, j in enumerate(out):
                if float(np.cross(u[i], u[j]) @ ref) > 0.0:
                    pos = p
                    break
            out.insert(pos, i)
        return out

    order = sort_half(halves[0]) + sort_half(halves[1])

    tris: list[tuple[int, int, int]] = []
    for t in range(1, len(order) - 1):
        a, b, cc = order[0], order[t], order[t + 1]
        n = np.cross(pts[b] - pts[a], pts[cc] - pts[a])
        area2 = float(np.linalg.norm(n))
        if area2 / 2.0 <= eps_area:
            continue
        if float(n @ ref) < 0.0:
            a, b = b, a
        tris.append((a, b, cc))
    return tris


def slice_mesh(mesh: NMesh, cam: CameraState, w_slice: float) -> CrossSection:
    """Cross-section of a 4D mesh in the camera frame at w = w_slice."""
    if mesh.dim != 4:
        raise ValueError(f"slice_mesh needs a 4D mesh, got dimension {mesh.dim}")
    if mesh.is_empty():
        return empty_section()
    verts_cam = transform_points(cam, mesh.vertices)
    normals_cam = mesh.normals @ view_basis(cam).T
    w = verts_cam[:, 3]
    span = float(np.abs(w - w_slice).max()) if w.size else 1.0
    eps_w = EPS_W_REL * max(span, 1.0)

    out_vertices: list[np.ndarray] = []
    out_tris: list[tuple[int, int, int]] = []
    out_src: list[int] = []
    offset = 0
    for f in range(mesh.facet_count):
        pts4 = slice_facet(verts_cam[mesh.facets[f]], w_slice, eps_w)
        if pts4.shape[0] < 3:
            continue
        pts3 = pts4[:, :3]
        tris = tessellate_section(pts3, normals_cam[f][:3])
        if not tris:
            continue
        out_vertices.append(pts3)
        for a, b, c in tris:
            out_tris.append((offset + a, offset + b, offset + c))
            out_src.append(f)
        offset += pts3.shape[0]
    if not out_tris:
        return empty_section()
    return CrossSection(
        np.vstack(out_vertices),
        np.asarray(out_tris, dtype=np.int64),
        np.asarray(out_src, dtype=np.int64),
    )


def tessellate_polytope(points: np.ndarray, dim: int) -> np.ndarray:
    """Simplex decomposition of a convex section polytope (dim >= 3 path).

    Delegates to the hull kernel's interior tessellation, which works in
    any dimension, so high-dimensional sections need no bespoke sorting.
    """
    return build_hull(np.asarray(points, dtype=np.float64), dim=dim).simplices


def section_volume(cs: CrossSection) -> float:
    """Signed volume enclosed by a watertight, consistently wound section."""
    if cs.is_empty():
        return 0.0
    a = cs.vertices[cs.triangles[:, 0]]
    b = cs.vertices[cs.triangles[:, 1]]
    c = cs.vertices[cs.triangles[:, 2]]
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum()) / 6.0


def section_to_obj(cs: CrossSection) -> str:
    """OBJ-style text: positions and 1-based triangle indices."""
    lines = [f"v {p[0]:.17g} {p[1]:.17g} {p[2]:.17g}" for p in cs.vertices]
    lines += [f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}" for t in cs.triangles]
    return "\n".join(lines) + ("\n" if lines else "")
