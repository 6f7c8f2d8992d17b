"""Dimension-generic vector and geometric-algebra primitives.

Vectors are plain 1-D numpy arrays of length N. Rotations are represented
by rotors (even-grade elements of the Euclidean geometric algebra), which
compose associatively in any dimension and never suffer gimbal lock. Facet
normals come from the Hodge dual of a wedge product, evaluated as signed
cofactor determinants.

Orientation conventions fixed here and relied on elsewhere:

* ``wedge_normal([e1, e2])`` in 3D returns ``+e3`` (right-handed dual).
* ``rotor_from_plane(i, j, theta)`` with positive ``theta`` turns axis i
  toward axis j, so the 2D rotor for the (x, y) plane matches the standard
  counterclockwise rotation matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "GAError",
    "PoseParams",
    "Rotor",
    "CameraState",
    "as_vector",
    "basis_vector",
    "planes",
    "plane_index",
    "wedge_normal",
    "rotor_from_plane",
    "rotor_identity",
    "rotor_compose",
    "rotor_reverse",
    "rotor_apply",
    "rotor_to_matrix",
    "pose_to_rotor",
    "view_basis",
    "view_transform",
    "transform_points",
]

# Residue above this (relative) in the sandwich product means the rotor
# itself is corrupt, not merely imprecise.
GRADE_RESIDUE_TOL = 1e-9


class GAError(RuntimeError):
    """Internal consistency failure in a geometric-algebra computation."""


def as_vector(coords: Iterable[float], dim: int | None = None) -> np.ndarray:
    """Coerce to a float64 vector, checking finiteness and dimension."""
    v = np.asarray(coords, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D coordinate array, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector components must be finite")
    return v


def basis_vector(axis: int, dim: int) -> np.ndarray:
    e = np.zeros(dim)
    e[axis] = 1.0
    return e


def planes(dim: int) -> list[tuple[int, int]]:
    """Ordered rotation planes (i, j) with i < j < dim, lexicographic."""
    return [(i, j) for i in range(dim) for j in range(i + 1, dim)]


def plane_index(i: int, j: int, dim: int) -> int:
    """Position of plane (i, j) in the lexicographic plane list."""
    if not (0 <= i < j < dim):
        raise ValueError(f"invalid plane ({i}, {j}) for dimension {dim}")
    # pairs (0,1)..(0,dim-1), (1,2).. precede (i, j)
    return i * dim - (i * (i + 1)) // 2 + (j - i - 1)


# ---------------------------------------------------------------------------
# Blade arithmetic (Euclidean metric). A basis blade is a bitmask over axes;
# the geometric product of two blades is their XOR with a reordering sign.


def _reorder_sign(a: int, b: int) -> float:
    a >>= 1
    swaps = 0
    while a:
        swaps += (a & b).bit_count()
        a >>= 1
    return -1.0 if swaps & 1 else 1.0


def _gp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Geometric product of dense multivectors (length 2**dim)."""
    out = np.zeros_like(a)
    for ma in np.nonzero(a)[0]:
        ca = a[ma]
        for mb in np.nonzero(b)[0]:
            out[ma ^ mb] += _reorder_sign(int(ma), int(mb)) * ca * b[mb]
    return out


def _reverse(components: np.ndarray) -> np.ndarray:
    out = components.copy()
    for m in range(len(out)):
        g = m.bit_count()
        if (g * (g - 1) // 2) & 1:
            out[m] = -out[m]
    return out


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rotor:
    """A normalized rotation operator.

    Stores the full even-grade element: composing single-plane rotors in
    four or more dimensions produces grade-4 (and higher even) terms, e.g.
    the product of xy- and zw-plane rotors, so scalar + bivector alone
    cannot represent a general composed rotation.
    """

    dim: int
    components: np.ndarray  # length 2**dim, odd-grade entries all zero

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("rotors need dimension >= 2")
        if self.components.shape != (1 << self.dim,):
            raise ValueError("component array does not match dimension")

    @property
    def scalar(self) -> float:
        return float(self.components[0])

    @property
    def bivector_coeffs(self) -> np.ndarray:
        """Coefficients on planes (i, j), lexicographic order."""
        return np.array(
            [self.components[(1 << i) | (1 << j)] for i, j in planes(self.dim)]
        )

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.components ** 2)))

    def normalized(self) -> "Rotor":
        n = self.norm()
        if n == 0.0:
            raise GAError("cannot normalize a zero rotor")
        return Rotor(self.dim, self.components / n)

    def is_identity(self) -> bool:
        return self.components[0] == 1.0 and not np.any(self.components[1:])


def rotor_identity(dim: int) -> Rotor:
    c = np.zeros(1 << dim)
    c[0] = 1.0
    return Rotor(dim, c)


def rotor_from_plane(i: int, j: int, theta: float, dim: int) -> Rotor:
    """Unit rotor turning axis i toward axis j by ``theta`` radians."""
    if not (0 <= i < j < dim):
        raise ValueError(f"invalid rotation plane ({i}, {j}) for dimension {dim}")
    c = np.zeros(1 << dim)
    c[0] = np.cos(theta / 2.0)
    c[(1 << i) | (1 << j)] = np.sin(theta / 2.0)
    return Rotor(dim, c)


def rotor_reverse(r: Rotor) -> Rotor:
    return Rotor(r.dim, _reverse(r.components))


def rotor_compose(first: Rotor, second: Rotor) -> Rotor:
    """Rotor applying ``first`` then ``second``."""
    if first.dim != second.dim:
        raise ValueError("rotor dimensions differ")
    return Rotor(first.dim, _gp(first.components, second.components)).normalized()


def rotor_apply(r: Rotor, v: np.ndarray) -> np.ndarray:
    """Rotate a vector by the sandwich product, keeping the grade-1 part."""
    v = as_vector(v, r.dim)
    if r.is_identity():
        return v.copy()
    mv = np.zeros(1 << r.dim)
    for k in range(r.dim):
        mv[1 << k] = v[k]
    res = _gp(_gp(_reverse(r.components), mv), r.components)
    out = np.array([res[1 << k] for k in range(r.dim)])
    for k in range(r.dim):
        res[1 << k] = 0.0
    residue = np.sqrt(np.sum(res ** 2))
    scale = max(float(np.linalg.norm(v)), 1.0)
    if residue > GRADE_RESIDUE_TOL * scale:
        raise GAError(f"sandwich product leaked grade != 1 (residue {residue:.3e})")
    return out


def rotor_to_matrix(r: Rotor) -> np.ndarray:
    """Matrix M with M @ v == rotor_apply(r, v)."""
    return np.column_stack([rotor_apply(r, basis_vector(k, r.dim)) for k in range(r.dim)])


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PoseParams:
    """Per-plane rotation angles, the user-facing pose parametrization."""

    dim: int
    plane_angles: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        for (i, j) in self.plane_angles:
            if not (0 <= i < j < self.dim):
                raise ValueError(f"invalid plane key ({i}, {j}) for dimension {self.dim}")
        object.__setattr__(self, "plane_angles", dict(self.plane_angles))

    def angle(self, plane: tuple[int, int]) -> float:
        return self.plane_angles.get(plane, 0.0)

    def with_angle(self, plane: tuple[int, int], value: float) -> "PoseParams":
        angles = dict(self.plane_angles)
        angles[plane] = value
        return PoseParams(self.dim, angles)


def pose_to_rotor(pose: PoseParams, dim: int | None = None) -> Rotor:
    """Compose per-plane rotors in lexicographic plane order.

    Earlier planes in the order are applied first (extrinsic, world-plane
    composition). All-zero angles give the exact identity rotor.
    """
    dim = pose.dim if dim is None else dim
    if dim != pose.dim:
        raise ValueError("pose dimension mismatch")
    r = rotor_identity(dim)
    nontrivial = False
    for plane in planes(dim):
        theta = pose.angle(plane)
        if theta != 0.0:
            r = rotor_compose(r, rotor_from_plane(plane[0], plane[1], theta, dim))
            nontrivial = True
    return r if nontrivial else rotor_identity(dim)


@dataclass(frozen=True)
class CameraState:
    """Camera position plus pose; the rotor cache always matches the pose."""

    position: np.ndarray
    pose: PoseParams
    rotor: Rotor

    @classmethod
    def create(cls, position: Iterable[float], pose: PoseParams) -> "CameraState":
        p = as_vector(position, pose.dim)
        return cls(position=p, pose=pose, rotor=pose_to_rotor(pose))

    @classmethod
    def identity(cls, dim: int) -> "CameraState":
        return cls.create(np.zeros(dim), PoseParams(dim))

    @property
    def dim(self) -> int:
        return self.pose.dim

    def moved_to(self, position: Iterable[float]) -> "CameraState":
        return CameraState(as_vector(position, self.dim), self.pose, self.rotor)

    def with_pose(self, pose: PoseParams) -> "CameraState":
        return CameraState.create(self.position, pose)


def view_basis(cam: CameraState) -> np.ndarray:
    """Rows are the camera-frame basis vectors expressed in world space."""
    return np.vstack(
        [rotor_apply(cam.rotor, basis_vector(k, cam.dim)) for k in range(cam.dim)]
    )


def view_transform(cam: CameraState, p_world: np.ndarray) -> np.ndarray:
    """World point to camera frame: project P - C onto the rotated basis."""
    p = as_vector(p_world, cam.dim)
    return view_basis(cam) @ (p - cam.position)


def transform_points(cam: CameraState, points: np.ndarray) -> np.ndarray:
    """Apply the view transform to an array of points, shape (V, dim)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != cam.dim:
        raise ValueError("point array does not match camera dimension")
    return (pts - cam.position) @ view_basis(cam).T


# ---------------------------------------------------------------------------
# Wedge-product normals.


def _det2(m) -> float:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def _det3(m) -> float:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _det(m: np.ndarray) -> float:
    n = m.shape[0]
    if n == 0:
        return 1.0
    if n == 1:
        return float(m[0, 0])
    if n == 2:
        return _det2(m)
    if n == 3:
        return _det3(m)
    # Larger minors go through LU with partial pivoting.
    return float(np.linalg.det(m))


def wedge_normal(spanning: Sequence[np.ndarray], dim: int) -> np.ndarray:
    """Vector orthogonal to N-1 spanning vectors in N dimensions.

    Computed as the Hodge dual of the wedge product, i.e. the cofactor
    expansion of the determinant whose first row is the symbolic basis.
    Returns the zero vector when the inputs are linearly dependent.
    """
    if len(spanning) != dim - 1:
        raise ValueError(f"need {dim - 1} spanning vectors for dimension {dim}, got {len(spanning)}")
    rows = [as_vector(v, dim) for v in spanning]
    mat = np.vstack(rows)
    cols = np.arange(dim)
    n = np.empty(dim)
    for k in range(dim):
        minor = mat[:, cols != k]
        n[k] = _det(minor) if k % 2 == 0 else -_det(minor)
    return n
