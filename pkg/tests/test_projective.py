"""Tests for the projective primitives: incidence, spectra, cross-ratios."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from hitchin.errors import (
    DegenerateSpan,
    LineInPlane,
    ModulusCollision,
    NotCollinear,
    NotRealSplit,
    PointOnLine,
)
from hitchin.projective import (
    Map4,
    ProjLine,
    ProjPlane,
    ProjPoint,
    cross_ratio,
    eigen_flags,
    join,
    line_plane_meet,
    meet_planes,
    rank_margin,
    span_line_point,
)
from hitchin.surface import fuchsian_octagon, translation_length
from hitchin.reps import sym3

E = np.eye(4)


def random_point(rng):
    return ProjPoint(rng.standard_normal(4))


def random_map(rng):
    while True:
        m = rng.standard_normal((4, 4))
        if abs(np.linalg.det(m)) > 1e-3:
            return Map4(m)


class TestJoin:
    def test_coordinate_axes(self):
        line = join(ProjPoint(E[0]), ProjPoint(E[1]))
        np.testing.assert_allclose(line.pluecker, [1, 0, 0, 0, 0, 0], atol=1e-15)

    def test_symmetric(self):
        rng = np.random.RandomState(0)
        for _ in range(20):
            p, q = random_point(rng), random_point(rng)
            assert join(p, q).same(join(q, p))

    def test_matches_minor_oracle(self):
        p, q = ProjPoint([1, 0, 0, 0]), ProjPoint([1, 1, 0, 0])
        line = join(p, q)
        assert line.same(join(ProjPoint(E[0]), ProjPoint(E[1])))
        expected = oracles.pluecker_from_points(p.coords, q.coords)
        expected /= np.linalg.norm(expected)
        residual = min(
            np.linalg.norm(line.pluecker - expected),
            np.linalg.norm(line.pluecker + expected),
        )
        assert residual < 1e-12

    def test_coincident_points_rejected(self):
        with pytest.raises(DegenerateSpan):
            join(ProjPoint(E[0]), ProjPoint(-E[0]))

    def test_pluecker_relation(self):
        rng = np.random.RandomState(1)
        for _ in range(50):
            line = join(random_point(rng), random_point(rng))
            assert oracles.pluecker_residual(line.pluecker) < 1e-12


class TestMeetPlanes:
    def test_coordinate_planes(self):
        line = meet_planes(ProjPlane([0, 0, 0, 1]), ProjPlane([0, 0, 1, 0]))
        assert line.same(join(ProjPoint(E[0]), ProjPoint(E[1])))

    def test_dual_of_join(self):
        rng = np.random.RandomState(2)
        for _ in range(20):
            u, v = rng.standard_normal(4), rng.standard_normal(4)
            line = meet_planes(ProjPlane(u), ProjPlane(v))
            dual = oracles.dual_pluecker(oracles.pluecker_from_points(u, v))
            dual /= np.linalg.norm(dual)
            assert min(
                np.linalg.norm(line.pluecker - dual),
                np.linalg.norm(line.pluecker + dual),
            ) < 1e-10

    def test_osculating_plane_intersection(self):
        # Planes tangent to the monomial curve at [X] and [Y] meet in the
        # line of cubics divisible by XY, spanned by X^2 Y and X Y^2.
        h = ProjPlane(oracles.dual_veronese_covector(0.0))
        k = ProjPlane(oracles.dual_veronese_covector(np.pi / 2))
        line = meet_planes(h, k)
        assert line.same(join(ProjPoint(E[1]), ProjPoint(E[2])))

    def test_equal_planes_rejected(self):
        with pytest.raises(DegenerateSpan):
            meet_planes(ProjPlane([0, 0, 0, 1]), ProjPlane([0, 0, 0, -1]))


class TestLinePlaneMeet:
    def test_axis_example(self):
        line = join(ProjPoint(E[0]), ProjPoint(E[1]))
        point = line_plane_meet(line, ProjPlane([0, 1, 0, 0]))
        assert point.same(ProjPoint(E[0]))

    def test_incidence_closure(self):
        rng = np.random.RandomState(3)
        for _ in range(30):
            line = join(random_point(rng), random_point(rng))
            plane = ProjPlane(rng.standard_normal(4))
            point = line_plane_meet(line, plane)
            assert line.contains(point)
            assert plane.contains(point)

    def test_divisibility_example(self):
        # span(X^3, X^2 Y) meets {divisible by Y} in [X^2 Y].
        line = join(ProjPoint(E[0]), ProjPoint(E[1]))
        point = line_plane_meet(line, ProjPlane([1, 0, 0, 0]))
        assert point.same(ProjPoint(E[1]))

    def test_contained_line_rejected(self):
        line = join(ProjPoint(E[0]), ProjPoint(E[1]))
        with pytest.raises(LineInPlane):
            line_plane_meet(line, ProjPlane([0, 0, 0, 1]))


class TestSpanLinePoint:
    def test_axis_example(self):
        line = join(ProjPoint(E[0]), ProjPoint(E[1]))
        plane = span_line_point(line, ProjPoint(E[2]))
        np.testing.assert_allclose(np.abs(plane.covector), [0, 0, 0, 1], atol=1e-15)

    def test_meet_of_own_span_degenerates(self):
        rng = np.random.RandomState(4)
        line = join(random_point(rng), random_point(rng))
        plane = span_line_point(line, random_point(rng))
        with pytest.raises(LineInPlane):
            line_plane_meet(line, plane)

    def test_annihilates_generators(self):
        rng = np.random.RandomState(5)
        for _ in range(30):
            p, q, r = (random_point(rng) for _ in range(3))
            plane = span_line_point(join(p, q), r)
            for pt in (p, q, r):
                assert abs(plane.covector @ pt.coords) < 1e-10

    def test_point_on_line_rejected(self):
        line = join(ProjPoint(E[0]), ProjPoint(E[1]))
        with pytest.raises(PointOnLine):
            span_line_point(line, ProjPoint([1, 1, 0, 0]))


class TestRankMargin:
    def test_orthonormal_basis(self):
        assert rank_margin(list(E)) == pytest.approx(1.0)

    def test_repeated_vector(self):
        assert rank_margin([E[0], E[0]]) == pytest.approx(0.0, abs=1e-15)

    def test_vandermonde_factorization(self):
        thetas = [0.0, 0.4, 0.9, 2.0]
        rows = [oracles.veronese_point(t) for t in thetas]
        units = np.array([r / np.linalg.norm(r) for r in rows])
        margin = rank_margin(units)
        assert margin > 0
        sing = np.linalg.svd(units, compute_uv=False)
        np.testing.assert_allclose(margin, sing[-1], rtol=1e-12)
        oracle = abs(oracles.vandermonde_det(thetas))
        oracle /= np.prod([np.linalg.norm(r) for r in rows])
        np.testing.assert_allclose(np.prod(sing), oracle, rtol=1e-9)

    def test_permutation_and_scale_invariant(self):
        rng = np.random.RandomState(6)
        vectors = [v / np.linalg.norm(v) for v in rng.standard_normal((4, 4))]
        reference = rank_margin(vectors)
        shuffled = [vectors[i] for i in (2, 0, 3, 1)]
        np.testing.assert_allclose(rank_margin(shuffled), reference, rtol=1e-12)
        rescaled = [-v for v in vectors]
        np.testing.assert_allclose(rank_margin(rescaled), reference, rtol=1e-12)


class TestCrossRatio:
    def line_point(self, u):
        """Affine chart [1, u, 0, 0] of the line span(e1, e2); None = infinity."""
        if u is None:
            return ProjPoint(E[1])
        return ProjPoint([1.0, u, 0.0, 0.0])

    def test_harmonic(self):
        a, b, c, d = (self.line_point(u) for u in (0.0, None, 1.0, -1.0))
        np.testing.assert_allclose(cross_ratio(a, b, c, d), -1.0, atol=1e-12)

    def test_coincident_pair_convention(self):
        # Exact coincidence in a pair whose limit is 1 returns exactly 1;
        # a coincidence that kills only the denominator diverges.
        a, b, c, d = (self.line_point(u) for u in (0.0, 2.0, 1.0, -1.0))
        assert cross_ratio(a, a, c, d) == 1.0
        assert cross_ratio(a, b, c, c) == 1.0
        assert np.isinf(cross_ratio(a, b, b, d))

    def test_contraction_rate_of_diagonal_map(self):
        # For delta = diag(2, 1/2) on the embedded projective line, the
        # cross-ratio of (t, delta^{-1} t) against the fixed points is the
        # inverse of the top eigenvalue ratio.
        delta = Map4(np.diag([2.0, 0.5, 1.0, 1.0]))
        t = self.line_point(0.7)
        t_back = delta.inverse().act_point(t)
        value = cross_ratio(t, t_back, self.line_point(0.0), self.line_point(None))
        assert abs(abs(value) - 0.25) < 1e-12
        np.testing.assert_allclose(
            abs(value), 1 / oracles.cross_ratio_affine(0.7, 4 * 0.7, 0.0, np.inf),
            rtol=1e-12,
        )

    def test_affine_oracle(self):
        rng = np.random.RandomState(7)
        for _ in range(50):
            u = rng.standard_normal(4)
            value = cross_ratio(*(self.line_point(x) for x in u))
            np.testing.assert_allclose(value, oracles.cross_ratio_affine(*u), rtol=1e-9)

    def test_map_invariance(self):
        rng = np.random.RandomState(8)
        for _ in range(1000):
            u = rng.standard_normal(4)
            points = [self.line_point(x) for x in u]
            g = random_map(rng)
            before = cross_ratio(*points)
            after = cross_ratio(*(g.act_point(p) for p in points))
            assert abs(after - before) < 1e-9 * max(1.0, abs(before))

    def test_not_collinear_rejected(self):
        with pytest.raises(NotCollinear):
            cross_ratio(
                ProjPoint(E[0]), ProjPoint(E[1]), ProjPoint(E[2]), ProjPoint([1, 1, 0, 0])
            )


class TestEigenFlags:
    def test_diagonal(self):
        data = eigen_flags(Map4(np.diag([8.0, 2.0, 0.5, 0.125])))
        np.testing.assert_allclose(data.eigenvalues, [8, 2, 0.5, 0.125], rtol=1e-12)
        for i in range(4):
            assert data.eigenlines[i].same(ProjPoint(E[i]))
        assert data.gap == pytest.approx(4.0)
        assert data.signs == (1, 1, 1, 1)

    def test_conjugation_equivariance(self):
        rng = np.random.RandomState(9)
        diag = Map4(np.diag([8.0, 2.0, 0.5, 0.125]))
        for _ in range(20):
            g = random_map(rng)
            conj = Map4(g.matrix @ diag.matrix @ np.linalg.inv(g.matrix))
            data = eigen_flags(conj)
            np.testing.assert_allclose(data.eigenvalues, [8, 2, 0.5, 0.125], rtol=1e-8)
            for i in range(4):
                assert data.eigenlines[i].dist(g.act_point(ProjPoint(E[i]))) < 1e-8

    def test_symmetric_cube_spectrum(self):
        base = fuchsian_octagon()
        a1 = base.letter_matrix(0)
        ell = translation_length(a1)
        data = eigen_flags(Map4(sym3(a1)))
        np.testing.assert_allclose(
            data.eigenvalues, oracles.spectrum_from_length(ell), rtol=1e-8
        )

    def test_eigen_residual(self):
        rng = np.random.RandomState(10)
        g = random_map(rng)
        conj = Map4(g.matrix @ np.diag([8.0, 2.0, 0.5, 0.125]) @ np.linalg.inv(g.matrix))
        data = eigen_flags(conj)
        for lam, line in zip(data.eigenvalues, data.eigenlines):
            assert np.linalg.norm(conj.matrix @ line.coords - lam * line.coords) < 1e-9

    def test_complex_pair_rejected(self):
        rot = np.eye(4)
        rot[:2, :2] = [[0.0, -1.0], [1.0, 0.0]]
        with pytest.raises(NotRealSplit):
            eigen_flags(Map4(rot))

    def test_modulus_collision_rejected(self):
        with pytest.raises(ModulusCollision):
            eigen_flags(Map4(np.diag([4.0, 4.0, 1.0, 0.5])))


class TestNormalization:
    def test_point_normalized(self):
        p = ProjPoint([-2.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(p.coords, E[0], atol=1e-15)
        assert p.same(ProjPoint([5.0, 0, 0, 0]))

    def test_duality_roundtrip(self):
        rng = np.random.RandomState(11)
        for _ in range(20):
            p, q, r = (random_point(rng) for _ in range(3))
            plane = span_line_point(join(p, q), r)
            oracle = oracles.plane_through([p.coords, q.coords, r.coords])
            assert min(
                np.linalg.norm(plane.covector - oracle),
                np.linalg.norm(plane.covector + oracle),
            ) < 1e-10


@given(st.floats(-50, 50), st.floats(-50, 50))
@settings(max_examples=30, deadline=None)
def test_join_contains_inputs(x, y):
    p = ProjPoint([1.0, x, y, x * y])
    q = ProjPoint([0.0, 1.0, x, y])
    if p.dist(q) < 1e-6:
        return
    line = join(p, q)
    assert line.contains(p) and line.contains(q)
    assert oracles.pluecker_residual(line.pluecker) < 1e-12


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_cross_ratio_symmetry(seed):
    # Swapping both pairs [a,b;c,d] -> [b,a;d,c] preserves the value.
    rng = np.random.RandomState(seed)
    u = rng.standard_normal(4) * 3
    pts = [ProjPoint([1.0, x, 0.0, 0.0]) for x in u]
    if min(abs(u[i] - u[j]) for i in range(4) for j in range(i + 1, 4)) < 1e-3:
        return
    first = cross_ratio(pts[0], pts[1], pts[2], pts[3])
    second = cross_ratio(pts[1], pts[0], pts[3], pts[2])
    np.testing.assert_allclose(first, second, rtol=1e-9)
