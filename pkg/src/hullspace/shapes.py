"""Ready-made solids: hypercubes, stretched poles, random hulls, hollow boxes.

All convex primitives are built by running the hull kernel over their
corner or sample points, so facet counts are whatever the triangulation
produces (deterministic for a fixed input order). The hollow box is the
one non-convex member and comes out of the Boolean pipeline itself.
"""
from __future__ import annotations

from itertools import product

import numpy as np

from .hull import build_hull
from .mesh import NMesh

__all__ = [
    "box_corners",
    "box_mesh",
    "hypercube",
    "pole",
    "sample_ball",
    "random_convex",
    "hollow_box",
]


def box_corners(extents, center=None) -> np.ndarray:
    """Corner points of an axis-aligned box with the given half-extents."""
    ext = np.asarray(extents, dtype=np.float64)
    dim = ext.shape[0]
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=np.float64)
    corners = np.array(list(product((-1.0, 1.0), repeat=dim)))
    return c + corners * ext


def box_mesh(extents, center=None) -> NMesh:
    result = build_hull(box_corners(extents, center), with_simplices=False)
    return result.mesh


def hypercube(dim: int, side: float = 1.0, center=None) -> NMesh:
    """Axis-aligned hypercube of the given side length."""
    return box_mesh(np.full(dim, side / 2.0), center)


def pole(dim: int, side: float = 1.0, axis: int = 0, stretch: float = 4.0) -> NMesh:
    """Box elongated along one axis."""
    ext = np.full(dim, side / 2.0)
    ext[axis] *= stretch
    return box_mesh(ext)


def sample_ball(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """Random points in the unit ball.

    3D uses the volume-uniform law; higher dimensions pair a uniform
    direction with a uniform radius, which concentrates samples toward the
    center and keeps hull sizes close to the published 4D profile.
    """
    x = rng.normal(size=(n, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    r = rng.random(n)
    if dim <= 3:
        r = r ** (1.0 / dim)
    return x * r[:, None]


def random_convex(dim: int, n: int = 30, seed: int = 0, scale: float = 1.0) -> NMesh:
    """Convex hull of seeded random ball points."""
    rng = np.random.default_rng(seed)
    result = build_hull(scale * sample_ball(rng, n, dim), with_simplices=False)
    from .mesh import compact_mesh

    return compact_mesh(result.mesh)[0]


def hollow_box(dim: int, outer: float = 1.0, inner: float = 0.7) -> NMesh:
    """Box with a concentric box-shaped cavity (Boolean difference)."""
    from .boolean import BooleanKind, boolean_op

    return boolean_op(hypercube(dim, outer), hypercube(dim, inner), BooleanKind.DIFFERENCE)
