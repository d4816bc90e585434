import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypfed.errors import DomainError
from hypfed.geometry import (Curvature, circumference, dist, euc_radius, exp_map, geodesic_midpoint,
                             hyp_radius, log_map, mobius_add, pairwise_dist)

from conftest import cayley_dist, random_disc

coord = st.floats(-0.65, 0.65, allow_nan=False)
point = st.tuples(coord, coord).map(np.array)
curv = st.sampled_from([0.5, 1.0, 2.0])


def test_curvature_s():
    c = Curvature(4.0)
    assert c.s * c.s * c.k == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        Curvature(0.0)


class TestMobius:
    def test_right_identity(self):
        np.testing.assert_allclose(mobius_add([0.3, 0], [0, 0]), [0.3, 0])

    def test_left_inverse(self):
        x = np.array([0.3, 0.2])
        np.testing.assert_allclose(mobius_add(-x, x), [0, 0], atol=1e-12)

    def test_hand_value(self):
        # (1 + 2*0.12 + 0.16)*0.3 + (1 - 0.09)*0.4 over 1 + 0.24 + 0.0144
        np.testing.assert_allclose(mobius_add([0.3, 0], [0.4, 0]), [0.784 / 1.2544, 0], rtol=1e-14)
        assert 0.784 / 1.2544 == pytest.approx(0.625)

    def test_rejects_outside(self):
        with pytest.raises(DomainError):
            mobius_add([1.0, 0], [0, 0])
        with pytest.raises(DomainError):
            mobius_add([0.5, 0.5], [0, 0], k=4.0)

    @given(point, point, curv)
    def test_stays_inside(self, x, y, k):
        x, y = x / math.sqrt(k), y / math.sqrt(k)
        z = mobius_add(x, y, k)
        assert k * (z @ z) < 1


class TestMaps:
    def test_log_at_origin(self):
        np.testing.assert_allclose(log_map([0, 0], [0.5, 0]), [math.atanh(0.5), 0], rtol=1e-14)
        assert math.atanh(0.5) == pytest.approx(0.5493, abs=1e-4)

    def test_log_same_point_is_zero(self):
        p = [0.2, -0.4]
        np.testing.assert_array_equal(log_map(p, p), [0, 0])

    def test_exp_at_origin(self):
        np.testing.assert_allclose(exp_map([0, 0], [0.5, 0]), [math.tanh(0.5), 0], rtol=1e-14)

    def test_exp_zero_vector(self):
        np.testing.assert_array_equal(exp_map([0.1, 0.2], [0, 0]), [0.1, 0.2])

    def test_inverse_pair_bulk(self, rng):
        for k in (0.5, 1.0, 3.0):
            p = random_disc(rng, 10_000, 0.9, k)
            x = random_disc(rng, 10_000, 0.9, k)
            back = exp_map(p, log_map(p, x, k), k)
            assert np.max(np.abs(back - x)) < 1e-9

    @given(point, st.tuples(st.floats(-2, 2), st.floats(-2, 2)).map(np.array), curv)
    def test_log_exp(self, p, v, k):
        p = p / math.sqrt(k)
        np.testing.assert_allclose(log_map(p, exp_map(p, v, k), k), v, atol=1e-9)

    def test_log_norm_tracks_distance(self, rng):
        # |log_p x| scaled by the conformal factor is the distance
        p = random_disc(rng, 500, 0.8)
        x = random_disc(rng, 500, 0.8)
        v = log_map(p, x)
        lam = 2 / (1 - np.sum(p * p, axis=1))
        np.testing.assert_allclose(lam * np.linalg.norm(v, axis=1), dist(p, x), rtol=1e-9)


class TestDist:
    def test_zero(self):
        assert dist([0.4, 0.1], [0.4, 0.1]) == 0

    def test_from_origin(self):
        assert dist([0, 0], [0.3, 0]) == pytest.approx(2 * math.atanh(0.3), rel=1e-14)
        assert 2 * math.atanh(0.3) == pytest.approx(0.61904, abs=1e-5)

    def test_symmetric_pair(self):
        d = dist([0.3, 0], [-0.3, 0])
        assert d == pytest.approx(1.23807, abs=1e-5)
        assert d == pytest.approx(cayley_dist([0.3, 0], [-0.3, 0]), rel=1e-13)

    def test_against_arccosh_form(self, rng):
        for k in (0.25, 1.0, 2.0):
            x = random_disc(rng, 2000, 0.95, k)
            y = random_disc(rng, 2000, 0.95, k)
            np.testing.assert_allclose(dist(x, y, k), cayley_dist(x, y, k), rtol=1e-8)

    def test_metric_axioms(self, rng):
        x, y, z = (random_disc(rng, 10_000, 0.95) for _ in range(3))
        assert np.array_equal(dist(x, y), dist(y, x))
        assert np.all(dist(x, z) <= dist(x, y) + dist(y, z) + 1e-9)

    @given(point, point, st.floats(0, 2 * math.pi))
    def test_rotation_isometry(self, x, y, t):
        Q = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
        assert dist(Q @ x, Q @ y) == pytest.approx(dist(x, y), abs=1e-9)

    def test_pairwise(self, rng):
        X, Y = random_disc(rng, 5), random_disc(rng, 7)
        D = pairwise_dist(X, Y)
        assert D.shape == (5, 7)
        assert D[3, 4] == pytest.approx(dist(X[3], Y[4]))


class TestMidpoint:
    def test_on_axis(self):
        np.testing.assert_allclose(geodesic_midpoint([0, 0], [0.6, 0]), [1 / 3, 0], atol=1e-15)

    def test_same_point(self):
        np.testing.assert_allclose(geodesic_midpoint([0.2, 0.3], [0.2, 0.3]), [0.2, 0.3])

    @given(point, point, curv)
    def test_halves_distance(self, x, y, k):
        x, y = x / math.sqrt(k), y / math.sqrt(k)
        m = geodesic_midpoint(x, y, k)
        a, b, d = dist(x, m, k), dist(m, y, k), dist(x, y, k)
        assert abs(a - b) <= 1e-9
        assert a + b == pytest.approx(d, abs=1e-9)
        np.testing.assert_allclose(geodesic_midpoint(y, x, k), m, atol=1e-9)


class TestRadii:
    def test_values(self):
        assert hyp_radius(0.0) == 0 and euc_radius(0.0) == 0
        assert hyp_radius(0.5) == pytest.approx(math.log(3), rel=1e-14)
        assert hyp_radius(0.95) == pytest.approx(math.log(39), rel=1e-14)
        assert math.log(39) == pytest.approx(3.6636, abs=1e-4)

    def test_domain(self):
        with pytest.raises(DomainError):
            hyp_radius(1.0)
        with pytest.raises(DomainError):
            hyp_radius(0.8, s=0.5)

    def test_inverse(self):
        for s in (0.5, 1.0, 2.0):
            rh = np.linspace(0, 10 * s, 1001)
            np.testing.assert_allclose(hyp_radius(euc_radius(rh, s)[:-1], s), rh[:-1], atol=1e-12 * 10 * s + 1e-9)
            r = np.linspace(0, 0.99 * s, 500)
            np.testing.assert_allclose(euc_radius(hyp_radius(r, s), s), r, atol=1e-12)

    def test_circumference(self):
        assert circumference(0.0) == 0
        assert circumference(1.0) == pytest.approx(2 * math.pi * math.sinh(1), rel=1e-14)
        # 7.3843 is a rounding slip for 7.38401
        assert circumference(1.0) == pytest.approx(7.3843, abs=1e-3)
        assert circumference(math.log(39)) == pytest.approx(122.44, abs=0.01)
        c = circumference(np.linspace(0, 5, 100))
        assert np.all(np.diff(c) > 0)
