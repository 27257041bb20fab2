import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simon import lorentz
from simon.lorentz import GeometryError, LorentzManifold

CURVATURES = [0.5, 1.0, 2.0]


def random_tangent(rng, count, n, max_norm=10.0):
    v = rng.normal(size=(count, n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.uniform(0, max_norm, size=(count, 1))


class TestInner:
    def test_origin(self):
        o = lorentz.origin(4)
        assert lorentz.minkowski_inner(o, o) == -1.0

    def test_small(self):
        assert lorentz.minkowski_inner([1.0, 0.0], [1.0, 0.0]) == -1.0

    def test_mismatch(self):
        with pytest.raises(ValueError):
            lorentz.minkowski_inner([1.0, 0.0], [1.0, 0.0, 0.0])

    def test_on_manifold_point(self, rng):
        x = lorentz.exp_origin(rng.normal(size=6))
        assert lorentz.minkowski_inner(x, x) == pytest.approx(-1.0, abs=1e-6)


class TestExpLog:
    @pytest.mark.parametrize("c", CURVATURES)
    def test_zero_is_origin(self, c):
        np.testing.assert_array_equal(lorentz.exp_origin(np.zeros(3), c), lorentz.origin(3, c))

    def test_axis(self):
        a = 1.7
        np.testing.assert_allclose(lorentz.exp_origin([a, 0.0, 0.0]), [math.cosh(a), math.sinh(a), 0, 0], rtol=1e-15)

    def test_tiny_vector_series(self):
        v = np.array([1e-12, -2e-12])
        np.testing.assert_array_equal(lorentz.exp_origin(v)[1:], v)

    def test_constraint_1e9(self, rng):
        m = LorentzManifold(1.0)
        x = m.exp_origin(random_tangent(rng, 1000, 16))
        assert np.max(np.abs(m.residual(x))) < 1e-9
        assert np.all(x[:, 0] > 0)

    def test_log_origin_zero(self):
        np.testing.assert_array_equal(lorentz.log_origin(lorentz.origin(5)), np.zeros(5))

    def test_log_axis(self):
        np.testing.assert_allclose(lorentz.log_origin([math.cosh(2), math.sinh(2), 0.0]), [2.0, 0.0], rtol=1e-14)

    @pytest.mark.parametrize("c", CURVATURES)
    def test_roundtrip(self, c, rng):
        m = LorentzManifold(c)
        v = random_tangent(rng, 500, 32)
        back = m.log_origin(m.exp_origin(v))
        rel = np.linalg.norm(back - v, axis=1) / np.maximum(np.linalg.norm(v, axis=1), 1e-300)
        assert np.max(rel) < 1e-6

    def test_off_manifold(self):
        with pytest.raises(GeometryError):
            lorentz.log_origin([2.0, 0.0, 0.0])

    def test_negative_sheet(self):
        with pytest.raises(GeometryError):
            lorentz.log_origin([-1.0, 0.0])

    def test_non_finite(self):
        with pytest.raises(GeometryError):
            lorentz.exp_origin([np.inf, 0.0])


class TestDist:
    def test_origin_zero(self):
        o = lorentz.origin(3)
        assert lorentz.dist(o, o) == 0.0

    @pytest.mark.parametrize("c", CURVATURES)
    def test_radial(self, c, rng):
        m = LorentzManifold(c)
        v = random_tangent(rng, 300, 8)
        d = m.dist(m.exp_origin(v), m.origin(8))
        np.testing.assert_allclose(d, np.linalg.norm(v, axis=1), rtol=0, atol=1e-9)

    def test_symmetric_nonneg(self, rng):
        m = LorentzManifold(1.0)
        a = m.exp_origin(random_tangent(rng, 200, 5, 4))
        b = m.exp_origin(random_tangent(rng, 200, 5, 4))
        assert np.all(m.dist(a, b) == m.dist(b, a))
        assert np.all(m.dist(a, b) >= 0)
        assert np.all(m.dist(a, a) < 1e-7)

    def test_triangle(self, rng):
        m = LorentzManifold(1.0)
        a, b, c = (m.exp_origin(random_tangent(rng, 1000, 6, 5)) for _ in range(3))
        assert np.all(m.dist(a, c) <= m.dist(a, b) + m.dist(b, c) + 1e-7)

    def test_matches_arccosh_formula(self, rng):
        u = lorentz.exp_origin(rng.normal(size=(50, 4)))
        v = lorentz.exp_origin(rng.normal(size=(50, 4)))
        ref = np.arccosh(np.maximum(1.0, -lorentz.minkowski_inner(u, v)))
        np.testing.assert_allclose(lorentz.dist(u, v), ref, rtol=1e-9, atol=1e-7)

    def test_off_manifold(self):
        with pytest.raises(GeometryError):
            lorentz.dist([1.0, 1.0], [1.0, 0.0])


class TestGeodesic:
    @pytest.mark.parametrize("c", CURVATURES)
    def test_endpoints(self, c, rng):
        m = LorentzManifold(c)
        u = m.exp_origin(random_tangent(rng, 200, 6, 5))
        v = m.exp_origin(random_tangent(rng, 200, 6, 5))
        assert np.max(np.abs(m.geodesic(u, v, 0.0) - u)) < 1e-9
        assert np.max(np.abs(m.geodesic(u, v, 1.0) - v)) < 1e-9

    def test_degenerate(self, rng):
        u = lorentz.exp_origin(rng.normal(size=4))
        for t in (0.0, 0.3, 1.0):
            np.testing.assert_allclose(lorentz.geodesic(u, u, t), u, atol=1e-12)

    @pytest.mark.parametrize("t", [0.25, 0.5, 0.75])
    def test_additive(self, t, rng):
        m = LorentzManifold(1.0)
        u = m.exp_origin(random_tangent(rng, 300, 6, 5))
        v = m.exp_origin(random_tangent(rng, 300, 6, 5))
        g = m.geodesic(u, v, t)
        assert np.max(np.abs(m.dist(u, g) - t * m.dist(u, v))) < 1e-6
        assert np.max(np.abs(m.residual(g))) < 1e-6

    def test_midpoint(self, rng):
        m = LorentzManifold(2.0)
        u = m.exp_origin(random_tangent(rng, 300, 6, 5))
        v = m.exp_origin(random_tangent(rng, 300, 6, 5))
        g = m.geodesic(u, v, 0.5)
        assert np.max(np.abs(m.dist(u, g) - m.dist(g, v))) < 1e-7
        assert np.max(np.abs(m.dist(u, g) - m.dist(u, v) / 2)) < 1e-7

    @pytest.mark.parametrize("t", [-0.1, 1.5])
    def test_bad_t(self, t):
        o = lorentz.origin(2)
        with pytest.raises(ValueError):
            lorentz.geodesic(o, o, t)


class TestLift:
    def test_zero(self):
        np.testing.assert_array_equal(lorentz.lift(np.zeros(4)), lorentz.origin(4))

    def test_identity(self, rng):
        z = rng.normal(size=5)
        np.testing.assert_array_equal(lorentz.lift(z, 1.0, np.eye(5)), lorentz.exp_origin(z))

    def test_doubling_alpha(self, rng):
        m = LorentzManifold(1.0)
        z = rng.normal(size=(100, 6))
        w = rng.normal(size=(4, 6)) / 3
        d1 = m.dist(m.lift(z, 0.7, w), m.origin(4))
        d2 = m.dist(m.lift(z, 1.4, w), m.origin(4))
        np.testing.assert_allclose(d2, 2 * d1, rtol=0, atol=1e-9)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            lorentz.lift(np.zeros(3), 1.0, np.eye(4))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-4, 4), min_size=1, max_size=8), st.sampled_from(CURVATURES))
def test_exp_lands_on_manifold(v, c):
    x = LorentzManifold(c).exp_origin(np.array(v))
    assert abs(float(lorentz.constraint_residual(x, c))) < 1e-6 and x[0] > 0


def test_curvature_must_be_positive():
    with pytest.raises(ValueError):
        LorentzManifold(0.0)
