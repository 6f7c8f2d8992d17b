"""Vector/rotor algebra against rotation-matrix and cross-product oracles."""
import numpy as np
import pytest

from hullspace.ga import (
    CameraState,
    GAError,
    PoseParams,
    as_vector,
    basis_vector,
    plane_index,
    planes,
    pose_to_rotor,
    rotor_apply,
    rotor_compose,
    rotor_from_plane,
    rotor_identity,
    rotor_reverse,
    rotor_to_matrix,
    transform_points,
    view_transform,
    wedge_normal,
)


def givens(i, j, theta, dim):
    """Rotation-matrix oracle: turns axis i toward axis j by theta."""
    m = np.eye(dim)
    m[i, i] = np.cos(theta)
    m[j, j] = np.cos(theta)
    m[i, j] = -np.sin(theta)
    m[j, i] = np.sin(theta)
    return m


class TestWedgeNormal:
    def test_xy_plane_gives_plus_z(self):
        n = wedge_normal([np.array([1.0, 0, 0]), np.array([0.0, 1, 0])], 3)
        assert np.allclose(n, [0, 0, 1])

    def test_4d_basis_complement(self):
        n = wedge_normal([basis_vector(k, 4) for k in range(3)], 4)
        assert np.allclose(np.abs(n), [0, 0, 0, 1])

    def test_matches_cross_product_oracle(self):
        a = np.array([1.0, 2.0, 3.0])
        b = np.array([4.0, 5.0, 6.0])
        # oracle: classic 3D cross product
        assert np.allclose(np.cross(a, b), [-3.0, 6.0, -3.0])
        assert np.allclose(wedge_normal([a, b], 3), [-3.0, 6.0, -3.0])

    def test_cross_product_sign_is_global(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a, b = rng.normal(size=(2, 3))
            assert np.allclose(wedge_normal([a, b], 3), np.cross(a, b), atol=1e-12)

    @pytest.mark.parametrize("dim", [3, 4, 5, 6])
    def test_orthogonal_to_all_inputs(self, dim):
        rng = np.random.default_rng(dim)
        for _ in range(250):
            vs = rng.normal(size=(dim - 1, dim))
            n = wedge_normal(vs, dim)
            scale = np.linalg.norm(n) * np.linalg.norm(vs, axis=1)
            assert np.all(np.abs(vs @ n) <= 1e-9 * np.maximum(scale, 1e-30))

    def test_dependent_inputs_give_zero(self):
        v = np.array([1.0, 2.0, -1.0])
        assert np.allclose(wedge_normal([v, 2.0 * v], 3), 0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            wedge_normal([np.array([1.0, 0, 0])], 3)


class TestRotorFromPlane:
    def test_zero_angle_is_identity(self):
        r = rotor_from_plane(0, 1, 0.0, dim=4)
        assert r.scalar == 1.0
        assert not np.any(r.bivector_coeffs)

    def test_half_turn_2d(self):
        # oracle: cos(pi/2) = 0, sin(pi/2) = 1
        r = rotor_from_plane(0, 1, np.pi, dim=2)
        assert abs(r.scalar) < 1e-15
        assert np.isclose(abs(r.bivector_coeffs[0]), 1.0)

    def test_quarter_turn_xw(self):
        # oracle: cos(pi/4) = sin(pi/4) = sqrt(2)/2
        r = rotor_from_plane(0, 3, np.pi / 2, dim=4)
        assert np.isclose(r.scalar, np.sqrt(2) / 2)
        assert np.isclose(r.bivector_coeffs[plane_index(0, 3, 4)], np.sqrt(2) / 2)

    def test_invalid_plane(self):
        with pytest.raises(ValueError):
            rotor_from_plane(1, 1, 0.3, dim=3)
        with pytest.raises(ValueError):
            rotor_from_plane(0, 4, 0.3, dim=4)

    def test_unit_norm(self):
        r = rotor_from_plane(1, 3, 0.7718, dim=5)
        assert abs(r.norm() - 1.0) < 1e-12


class TestRotorApply:
    def test_identity_returns_exactly(self):
        v = np.array([1.0, 2.0, 3.0, 4.0])
        out = rotor_apply(rotor_identity(4), v)
        assert np.array_equal(out, v)

    def test_2d_quarter_turn_matches_matrix(self):
        r = rotor_from_plane(0, 1, np.pi / 2, dim=2)
        assert np.allclose(rotor_apply(r, basis_vector(0, 2)), [0.0, 1.0], atol=1e-15)

    def test_4d_xw_quarter_turn_matches_givens(self):
        r = rotor_from_plane(0, 3, np.pi / 2, dim=4)
        want = givens(0, 3, np.pi / 2, 4) @ basis_vector(0, 4)
        assert np.allclose(rotor_apply(r, basis_vector(0, 4)), want, atol=1e-15)
        assert np.allclose(want, [0, 0, 0, 1])

    @pytest.mark.parametrize("dim", [2, 3, 4, 5, 6])
    def test_isometry(self, dim):
        rng = np.random.default_rng(100 + dim)
        r = rotor_identity(dim)
        for i, j in planes(dim):
            r = rotor_compose(r, rotor_from_plane(i, j, rng.uniform(-np.pi, np.pi), dim))
        for _ in range(40):
            a, b = rng.normal(size=(2, dim))
            ra, rb = rotor_apply(r, a), rotor_apply(r, b)
            assert abs(np.linalg.norm(ra) - np.linalg.norm(a)) <= 1e-9 * max(np.linalg.norm(a), 1)
            assert abs(ra @ rb - a @ b) <= 1e-9 * max(abs(a @ b), 1)

    def test_matches_givens_matrix_everywhere(self):
        rng = np.random.default_rng(11)
        for dim in (2, 3, 4, 5):
            for i, j in planes(dim):
                theta = rng.uniform(-np.pi, np.pi)
                r = rotor_from_plane(i, j, theta, dim)
                m = givens(i, j, theta, dim)
                v = rng.normal(size=dim)
                assert np.allclose(rotor_apply(r, v), m @ v, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            rotor_apply(rotor_identity(3), np.zeros(4))


class TestPoseToRotor:
    def test_all_zero_angles_identity(self):
        r = pose_to_rotor(PoseParams(4))
        assert r.is_identity()

    def test_single_plane_equals_factor(self):
        pose = PoseParams(4, {(0, 1): np.pi / 2})
        r = pose_to_rotor(pose)
        want = rotor_from_plane(0, 1, np.pi / 2, dim=4)
        assert np.allclose(r.components, want.components, atol=1e-15)

    def test_composition_order_matches_matrix_product(self):
        # canonical order applies (0,1) before (0,2)
        pose = PoseParams(3, {(0, 1): np.pi / 2, (0, 2): np.pi / 2})
        r = pose_to_rotor(pose)
        oracle = givens(0, 2, np.pi / 2, 3) @ givens(0, 1, np.pi / 2, 3)
        for k in range(3):
            e = basis_vector(k, 3)
            assert np.allclose(rotor_apply(r, e), oracle @ e, atol=1e-12)

    def test_deterministic(self):
        pose = PoseParams(4, {(0, 2): 0.31, (1, 3): -1.7, (2, 3): 0.05})
        a = pose_to_rotor(pose)
        b = pose_to_rotor(PoseParams(4, dict(pose.plane_angles)))
        assert np.array_equal(a.components, b.components)

    def test_composed_4d_rotor_keeps_grade4(self):
        # xy and zw quarter turns: the grade-4 term is essential
        pose = PoseParams(4, {(0, 1): np.pi / 2, (2, 3): np.pi / 2})
        r = pose_to_rotor(pose)
        quad = r.components[0b1111]
        assert abs(quad) > 0.1
        v = np.array([1.0, 0.0, 0.0, 0.0])
        want = givens(2, 3, np.pi / 2, 4) @ givens(0, 1, np.pi / 2, 4) @ v
        assert np.allclose(rotor_apply(r, v), want, atol=1e-12)

    def test_invalid_plane_key(self):
        with pytest.raises(ValueError):
            PoseParams(3, {(2, 1): 0.1})


class TestViewTransform:
    def test_identity_camera_passthrough(self):
        cam = CameraState.identity(4)
        p = np.array([3.0, 1.0, 4.0, 1.0])
        assert np.allclose(view_transform(cam, p), p)

    def test_camera_at_point_gives_zero(self):
        cam = CameraState.create([3.0, 1.0, 4.0, 1.0], PoseParams(4, {(0, 2): 0.4}))
        assert np.allclose(view_transform(cam, cam.position), 0.0)

    def test_2d_example_matches_rotation_matrix(self):
        cam = CameraState.create([1.0, 0.0], PoseParams(2, {(0, 1): np.pi / 2}))
        got = view_transform(cam, np.array([1.0, 1.0]))
        # oracle: project (0,1) onto basis rotated by the 2x2 matrix
        basis = givens(0, 1, np.pi / 2, 2) @ np.eye(2)
        want = basis.T @ np.array([0.0, 1.0])
        assert np.allclose(got, want, atol=1e-15)
        assert np.allclose(got, [1.0, 0.0], atol=1e-15)

    def test_pure_rotation_equivalence(self):
        rng = np.random.default_rng(42)
        pose = PoseParams(4, {(0, 1): 0.3, (0, 3): -0.9, (1, 2): 2.2})
        cam = CameraState.create(np.zeros(4), pose)
        rev = rotor_reverse(cam.rotor)
        for _ in range(25):
            p = rng.normal(size=4)
            assert np.allclose(view_transform(cam, p), rotor_apply(rev, p), atol=1e-9)

    def test_transform_points_matches_single(self):
        rng = np.random.default_rng(3)
        cam = CameraState.create(rng.normal(size=4), PoseParams(4, {(1, 3): 0.77}))
        pts = rng.normal(size=(10, 4))
        bulk = transform_points(cam, pts)
        for k in range(10):
            assert np.allclose(bulk[k], view_transform(cam, pts[k]), atol=1e-12)


class TestHelpers:
    def test_plane_index_lexicographic(self):
        assert [plane_index(i, j, 4) for i, j in planes(4)] == list(range(6))
        assert planes(4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

    def test_as_vector_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            as_vector([1.0, np.nan])

    def test_rotor_to_matrix_consistent(self):
        r = pose_to_rotor(PoseParams(4, {(0, 3): 1.1, (1, 2): -0.4}))
        m = rotor_to_matrix(r)
        v = np.array([0.5, -1.0, 2.0, 0.25])
        assert np.allclose(m @ v, rotor_apply(r, v), atol=1e-12)

    def test_norm_invariant_after_compose(self):
        r = rotor_identity(4)
        rng = np.random.default_rng(5)
        for i, j in planes(4):
            r = rotor_compose(r, rotor_from_plane(i, j, rng.uniform(-3, 3), 4))
        assert abs(r.norm() - 1.0) < 1e-9

    def test_zero_rotor_rejected(self):
        from hullspace.ga import Rotor

        with pytest.raises(GAError):
            Rotor(3, np.zeros(8)).normalized()
