"""Cone-geometry error bound: helper identities, quadrature, membership."""

import numpy as np
import pytest

from latcode.bounds import (
    cone_bound,
    cone_membership,
    effective_estimate,
    h_finite_sum,
    h_gamma,
)
import latcode as lc


class TestH:
    def test_finite_sum_matches_gamma(self):
        for N in (2, 4, 8, 16):
            for t in (0.01, 0.5, 3.0, 20.0):
                assert h_finite_sum(N, t) == pytest.approx(h_gamma(N, t), rel=1e-10)

    def test_limits(self):
        assert h_finite_sum(8, 0.0) == pytest.approx(1.0)
        assert h_finite_sum(8, 500.0) == pytest.approx(0.0, abs=1e-12)


class TestConeBound:
    def test_monotone_in_noise(self):
        vals = [cone_bound(8, 1.375, s2, 1.0) for s2 in (0.02, 0.05, 0.1)]
        assert vals[0] < vals[1] < vals[2]

    def test_monotone_in_radius(self):
        # larger decodable cone -> smaller miss probability
        a = cone_bound(8, 1.375, 0.05, 0.6)
        b = cone_bound(8, 1.375, 0.05, 1.2)
        assert b < a

    def test_finite_sum_and_gamma_agree(self):
        a = cone_bound(8, 1.375, 0.05, 1.0, use_finite_sum=True)
        b = cone_bound(8, 1.375, 0.05, 1.0, use_finite_sum=False)
        assert a == pytest.approx(b, rel=1e-7)

    def test_domain_checks(self):
        with pytest.raises(ValueError):
            cone_bound(8, 1.0, 0.1, 0.0)
        with pytest.raises(ValueError):
            cone_bound(8, 1.0, 0.1, np.sqrt(8.0))  # r^2 >= N*P
        with pytest.raises(ValueError):
            cone_bound(1, 1.0, 0.1, 0.5)

    def test_effective_estimate_above_bound(self):
        # r_e <= r_c, and the miss probability grows as the cone narrows, so
        # the effective-radius estimate sits above the covering-radius bound
        lat = lc.zn(2)
        P, s2 = 1.25, 0.1
        est = effective_estimate(2, P, s2, lat)
        bound = cone_bound(2, P, s2, lat.covering_radius)
        assert est >= bound


class TestConeMembership:
    def test_on_axis(self):
        x = np.array([3.0, 0.0])
        assert cone_membership(np.array([10.0, 0.0]), x, 0.5)
        assert not cone_membership(np.array([10.0, 4.0]), x, 0.5)

    def test_line_distance_rule(self, rng):
        # membership iff the line through 0 and y passes within r of x
        r = 0.7
        x = rng.normal(size=4)
        x *= 3.0 / np.linalg.norm(x)
        for _ in range(200):
            y = rng.normal(size=4)
            u = y / np.linalg.norm(y)
            d2 = float(x @ x) - float(x @ u) ** 2
            assert cone_membership(y, x, r) == (d2 <= r * r + 1e-15)

    def test_scale_invariant(self, rng):
        x = np.array([2.0, 1.0, 0.0])
        y = rng.normal(size=3)
        r = 0.9
        assert cone_membership(y, x, r) == cone_membership(5.0 * y, x, r)
        assert cone_membership(y, x, r) == cone_membership(-2.0 * y, x, r)

    def test_zero_vectors(self):
        assert cone_membership(np.zeros(2), np.array([0.1, 0.0]), 0.5)
        with pytest.raises(ValueError):
            cone_membership(np.ones(2), np.zeros(2), 0.5)
