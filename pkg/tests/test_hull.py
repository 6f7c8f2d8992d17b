"""Hull construction against determinant-volume, visibility and scipy oracles."""
import time
from collections import Counter
from itertools import product

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from hullspace.hull import (
    DegenerateInput,
    NumericalFailure,
    AmbiguousOrientation,
    build_hull,
    hull_state,
    hull_volume,
    initial_simplex,
    orient_outward,
    visible_facets,
)
from hullspace.mesh import enclosed_volume, facet_centroids, simplex_volume


def cube_corners(dim=3, side=1.0):
    return side * np.array(list(product((0.0, 1.0), repeat=dim)))


def ball_points(rng, n, dim):
    x = rng.normal(size=(n, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x * (rng.random(n) ** (1.0 / dim))[:, None]


def ridge_share_counts(mesh):
    cnt = Counter()
    for f in mesh.facets:
        fs = sorted(f)
        for drop in range(mesh.dim):
            cnt[tuple(fs[:drop] + fs[drop + 1 :])] += 1
    return set(cnt.values())


class TestInitialSimplex:
    def test_exact_simplex_returns_all(self):
        pts = np.vstack([np.zeros(4), np.eye(4)])
        idx = initial_simplex(pts, 4)
        assert sorted(idx) == [0, 1, 2, 3, 4]

    def test_collinear_points_degenerate(self):
        t = np.linspace(0, 1, 10)
        pts = np.outer(t, [1.0, 2.0, 3.0])
        with pytest.raises(DegenerateInput):
            initial_simplex(pts, 3)

    def test_cube_corner_seed_has_positive_volume(self):
        pts = cube_corners()
        idx = initial_simplex(pts, 3)
        # oracle: |det| / 3! of the chosen tetrahedron
        vol = simplex_volume(pts[idx])
        assert vol > 0.0
        assert vol in (pytest.approx(1 / 6), pytest.approx(1 / 3))

    def test_too_few_points(self):
        with pytest.raises(DegenerateInput):
            initial_simplex(np.eye(3), 3)


class TestOrientOutward:
    def test_already_outward_unchanged(self):
        n = orient_outward(np.array([0.0, 0, 1]), np.array([0.0, 0, 1]), np.zeros(3))
        assert np.allclose(n, [0, 0, 1])

    def test_inward_flipped(self):
        n = orient_outward(np.array([0.0, 0, -1]), np.array([0.0, 0, 1]), np.zeros(3))
        assert np.allclose(n, [0, 0, 1])

    def test_ambiguous_raises(self):
        with pytest.raises(AmbiguousOrientation):
            orient_outward(np.array([0.0, 0, 1]), np.array([1.0, 0, 0]), np.zeros(3), eps=1e-12)

    def test_4d_sphere_hull_normals_point_out(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(40, 4))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        r = build_hull(pts)
        cents = facet_centroids(r.mesh)
        # symmetric body: outward normal has positive dot with the centroid
        assert np.all(np.einsum("fd,fd->f", r.mesh.normals, cents) > 0)


class TestVisibleFacets:
    def test_inside_point_sees_nothing(self):
        r = build_hull(cube_corners())
        state = hull_state(r.mesh, r.interior_centroid)
        assert visible_facets(state, np.array([0.5, 0.5, 0.5])).size == 0

    def test_point_beyond_x_face_sees_exactly_that_face(self):
        r = build_hull(cube_corners())
        state = hull_state(r.mesh, r.interior_centroid)
        p = np.array([10.0, 0.5, 0.5])
        vis = set(visible_facets(state, p).tolist())
        # oracle: per-facet signed distance
        cents = facet_centroids(r.mesh)
        want = {
            f
            for f in range(r.mesh.facet_count)
            if float(r.mesh.normals[f] @ (p - cents[f])) > state.eps
        }
        assert vis == want
        # exactly the two triangles tiling the x=1 face
        assert len(vis) == 2
        for f in vis:
            assert np.allclose(r.mesh.normals[f], [1, 0, 0])

    def test_regular_simplex_query_beyond_vertex(self):
        # regular tetrahedron; query outward along the centroid-vertex axis
        pts = np.array(
            [[1.0, 1, 1], [1.0, -1, -1], [-1.0, 1, -1], [-1.0, -1, 1]]
        )
        r = build_hull(pts)
        state = hull_state(r.mesh, r.interior_centroid)
        apex = 3.0 * pts[0]
        vis = set(visible_facets(state, apex).tolist())
        cents = facet_centroids(r.mesh)
        # oracle: brute-force per-facet visibility test
        want = {
            f
            for f in range(r.mesh.facet_count)
            if float(r.mesh.normals[f] @ (apex - cents[f])) > state.eps
        }
        assert vis == want and len(vis) == 3
        for f in vis:
            assert 0 in r.mesh.facets[f]


class TestBuildHull:
    def test_minimal_simplex_input(self):
        pts = np.vstack([np.zeros(4), np.eye(4)])
        r = build_hull(pts)
        assert r.mesh.facet_count == 5
        assert len(r.simplices) == 1

    def test_cube_volume_by_simplex_sum(self):
        r = build_hull(cube_corners())
        assert r.mesh.facet_count == 12
        assert abs(hull_volume(r) - 1.0) <= 1e-9

    def test_collinear_raises(self):
        t = np.linspace(0, 1, 8)
        with pytest.raises(DegenerateInput):
            build_hull(np.outer(t, [1.0, 1.0, 0.0]))

    def test_nonfinite_rejected(self):
        pts = np.vstack([np.zeros(3), np.eye(3)])
        pts[0, 0] = np.inf
        with pytest.raises(ValueError):
            build_hull(pts)

    @pytest.mark.parametrize("dim,n", [(3, 60), (4, 50), (5, 40)])
    def test_matches_scipy_oracle(self, dim, n):
        rng = np.random.default_rng(10 * dim + n)
        pts = rng.normal(size=(n, dim))
        r = build_hull(pts)
        sp = ConvexHull(pts)
        assert r.mesh.facet_count == len(sp.simplices)
        assert abs(hull_volume(r) - sp.volume) <= 1e-9 * sp.volume

    @pytest.mark.parametrize("dim", [3, 4, 5])
    def test_containment_watertight_volume(self, dim):
        rng = np.random.default_rng(dim)
        for _ in range(20):
            n = int(rng.integers(dim + 2, 60))
            pts = ball_points(rng, n, dim)
            r = build_hull(pts)
            m = r.mesh
            eps = 1e-9 * np.linalg.norm(pts.max(0) - pts.min(0))
            cents = facet_centroids(m)
            d = pts @ m.normals.T - np.einsum("fd,fd->f", m.normals, cents)
            assert d.max() <= eps
            assert ridge_share_counts(m) == {2}
            cone = enclosed_volume(m, origin=r.interior_centroid)
            assert abs(cone - hull_volume(r)) <= 1e-6 * cone

    def test_simplices_positively_oriented(self):
        rng = np.random.default_rng(77)
        r = build_hull(rng.normal(size=(30, 4)))
        corners = r.mesh.vertices[r.simplices]
        dets = np.linalg.det(corners[:, 1:, :] - corners[:, :1, :])
        assert np.all(dets > 0)

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(80, 3))
        a = build_hull(pts)
        b = build_hull(pts.copy())
        assert np.array_equal(a.mesh.facets, b.mesh.facets)
        assert np.array_equal(a.simplices, b.simplices)

    def test_hull_vertices_removed_from_scan(self):
        # every hull vertex index appears in a facet; interior points never do
        rng = np.random.default_rng(8)
        pts = ball_points(rng, 50, 3)
        r = build_hull(pts)
        hull_vertices = set(r.mesh.facets.ravel().tolist())
        sp = set(ConvexHull(pts).vertices.tolist())
        assert hull_vertices == sp

    def test_mean_facet_count_3d_1000(self):
        # published profile for this sampler: about 268.3 facets on average
        rng = np.random.default_rng(2024)
        counts = [
            build_hull(ball_points(rng, 1000, 3), with_simplices=False).mesh.facet_count
            for _ in range(12)
        ]
        assert abs(np.mean(counts) / 268.32 - 1.0) < 0.10

    def test_4d_1000_under_a_second(self):
        rng = np.random.default_rng(1)
        pts = ball_points(rng, 1000, 4)
        t0 = time.perf_counter()
        build_hull(pts)
        dt = time.perf_counter() - t0
        assert dt < 1.0

    def test_duplicate_points_are_harmless(self):
        rng = np.random.default_rng(4)
        pts = rng.normal(size=(20, 3))
        doubled = np.vstack([pts, pts])
        r = build_hull(doubled)
        sp = ConvexHull(pts)
        assert abs(hull_volume(r) - sp.volume) <= 1e-9 * sp.volume
