"""Undetected-error probability estimators and the CRC polynomial search."""

from fractions import Fraction

import numpy as np
import pytest

import latcode as lc
from latcode.embed import CrcSpec
from latcode.pud import (
    all_crc_polynomials,
    crc_poly_search,
    p_ud_kissing,
    p_ud_monte_carlo,
    p_ud_parity,
)


class TestParity:
    def test_values(self):
        assert p_ud_parity(0) == 1
        assert p_ud_parity(3) == Fraction(1, 8)
        assert p_ud_parity(8) == Fraction(1, 256)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            p_ud_parity(-1)


class TestKissing:
    def test_e8_single_parity(self):
        # kissing estimate equals a direct membership count over the set
        lat = lc.e8()
        pts = lc.kissing_set(lat)
        B = np.round(np.linalg.solve(lat.G, pts.T)).T.astype(np.int64)
        spec = CrcSpec((1, 1))
        want = Fraction(int(np.sum(spec.check_batch(np.mod(B, 2)))), len(B))
        assert p_ud_kissing(lat, spec.check) == want

    def test_zero_for_large_l(self):
        # enough well-chosen parity bits exclude every minimal vector
        spec, frac = crc_poly_search(4, lc.e8())
        assert frac == 0


class TestPolySearch:
    def test_enumeration(self):
        polys = all_crc_polynomials(3)
        assert [p.bits for p in polys] == [(1, 0, 0, 1), (1, 0, 1, 1), (1, 1, 0, 1), (1, 1, 1, 1)]

    def test_search_is_minimum(self):
        lat = lc.e8()
        spec, frac = crc_poly_search(3, lat)
        for cand in all_crc_polynomials(3):
            assert p_ud_kissing(lat, cand.check) >= frac

    def test_bw16_table_fractions(self):
        # searched kissing-set fractions for l = 4..8, exact over 4320 vectors
        want = {4: Fraction(240, 4320), 5: Fraction(112, 4320), 6: Fraction(52, 4320),
                7: Fraction(18, 4320), 8: Fraction(6, 4320)}
        lat = lc.bw16()
        for l, frac in want.items():
            _, got = crc_poly_search(l, lat)
            assert got == frac


class TestMonteCarlo:
    def test_pool_reuse(self, e8_code, rng):
        # a synthetic pool makes the estimator exact and CI sane
        spec = CrcSpec((1, 1))
        pool = rng.integers(0, 2, size=(4000, 8))
        p, (lo, hi) = p_ud_monte_carlo(e8_code, spec, 17.0, 0, error_lsbs=pool)
        want = np.mean(spec.check_batch(pool))
        assert p == pytest.approx(want)
        assert lo <= p <= hi

    def test_live_estimate(self, e8_code):
        # low SNR so errors are plentiful; parity estimate is the right scale
        spec = CrcSpec((1, 0, 1, 1))
        p, (lo, hi) = p_ud_monte_carlo(e8_code, spec, 10.0, 40_000, seed=1)
        assert 0.0 < p < 1.0
        assert hi - lo < 0.05
