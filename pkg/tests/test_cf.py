"""Compute-forward candidate selection and relay retry decoding."""

import itertools

import numpy as np
import pytest

import latcode as lc
from latcode.cf import (
    computation_rate,
    crc_combination_checker,
    enumerate_candidates,
    icf_decode,
    optimal_alpha,
    recover_messages,
    relay_retry,
    sample_fading,
)
from latcode.pud import crc_poly_search


def brute_force_candidates(h, P, sigma2, k, span=8):
    """Oracle: rank every integer vector in a big box by computation rate,
    drop integer multiples/negations of better-ranked vectors."""
    h = np.asarray(h, dtype=float)
    scored = []
    for a in itertools.product(range(-span, span + 1), repeat=len(h)):
        a = np.array(a)
        if not np.any(a):
            continue
        r = computation_rate(h, a, P, sigma2)
        if r <= 0:
            continue
        scored.append((r, -float(a @ a), a))
    scored.sort(key=lambda t: (-t[0], -t[1]))
    kept = []
    for r, _n, a in scored:
        dup = False
        for rp, ap in kept:
            nz = np.flatnonzero(ap)
            if np.all(a[ap == 0] == 0):
                q = a[nz[0]] / ap[nz[0]]
                if q != 0 and float(q).is_integer() and np.all(a == q * ap):
                    dup = True
                    break
        if not dup:
            kept.append((r, a))
        if len(kept) == k:
            break
    return kept


class TestRateAndAlpha:
    def test_rate_formula(self):
        h = np.array([1.0, 0.5])
        a = np.array([1, 1])
        P, s2 = 4.0, 0.25
        denom = a @ a - P * (h @ a) ** 2 / (s2 + P * h @ h)
        assert computation_rate(h, a, P, s2) == pytest.approx(0.5 * np.log2(1 / denom))

    def test_alpha_maximizes_rate(self, rng):
        # the closed-form alpha beats nearby scalings in effective-noise power
        h = sample_fading(rng)
        a = np.array([1, 2])
        P, s2 = 2.0, 0.1

        def noise_power(al):
            return s2 * al**2 + P * float(np.sum((al * h - a) ** 2))

        al = optimal_alpha(h, a, P, s2)
        assert noise_power(al) < noise_power(al + 1e-3)
        assert noise_power(al) < noise_power(al - 1e-3)

    def test_matched_channel_caps(self):
        # a exactly aligned with h and no noise -> capped rate
        assert computation_rate([1.0, 2.0], [1, 2], 1.0, 1e-30) == 60.0

    def test_rejects_zero_a(self):
        with pytest.raises(ValueError):
            computation_rate([1.0], [0], 1.0, 1.0)


class TestCandidates:
    def test_vs_brute_force(self, rng):
        P = 1.375
        for _ in range(25):
            h = sample_fading(rng)
            s2 = P / 10 ** (rng.uniform(5, 20) / 10)
            cands = enumerate_candidates(h, P, s2, 4)
            oracle = brute_force_candidates(h, P, s2, len(cands), span=10)
            for c, (r, a) in zip(cands, oracle):
                assert c.rate == pytest.approx(r, abs=1e-12)
                assert np.array_equal(c.a, a) or np.array_equal(c.a, -a)

    def test_sorted_and_deduplicated(self, rng):
        h = np.array([0.8, 0.6])
        cands = enumerate_candidates(h, 1.375, 0.01, 6)
        rates = [c.rate for c in cands]
        assert rates == sorted(rates, reverse=True)
        for i, c in enumerate(cands):
            for d in cands[:i]:
                nz = np.flatnonzero(d.a)
                if np.all(c.a[d.a == 0] == 0):
                    q = c.a[nz[0]] / d.a[nz[0]]
                    assert not (q != 0 and float(q).is_integer() and np.all(c.a == q * d.a))


class TestRelayDecoding:
    def test_icf_noiseless(self, e8_code, rng):
        B = np.stack([rng.integers(0, m, size=2) for m in e8_code.moduli], axis=1)
        X = e8_code.encode_batch(B)
        a = np.array([2, -1])
        y = a.astype(float) @ X
        xh = icf_decode(e8_code, y, 1.0)
        assert np.allclose(xh, y, atol=1e-9)

    def test_relay_retry_walks_list(self, e8_code, rng):
        B = np.stack([rng.integers(0, m, size=2) for m in e8_code.moduli], axis=1)
        X = e8_code.encode_batch(B)
        h = np.array([0.8, 0.6])
        y = h @ X  # noiseless
        cands = enumerate_candidates(h, e8_code.average_power(), 1e-4, 3)

        calls = []

        def genie(xh, a):
            calls.append(tuple(a))
            return np.allclose(xh, a.astype(float) @ X, atol=1e-9)

        xh, a, att = relay_retry(e8_code, y, cands, genie)
        assert att == len(calls)
        assert xh is not None and np.allclose(xh, a.astype(float) @ X)

    def test_crc_checker_needs_even_nesting(self):
        from latcode.codes import NestedLatticeCode

        spec, _ = crc_poly_search(3, lc.zn(2))
        odd = NestedLatticeCode(lc.zn(2), [3, 3])
        with pytest.raises(ValueError):
            crc_combination_checker(odd, spec)

    def test_recover_messages(self, e8_code, rng):
        B = np.stack([rng.integers(0, m, size=2) for m in e8_code.moduli], axis=1)
        X = e8_code.encode_batch(B)
        eqs = [(X[0] + X[1], np.array([1, 1])), (X[0] - X[1], np.array([1, -1]))]
        got = recover_messages(eqs, 2, e8_code)
        assert np.array_equal(got[0], B[0]) and np.array_equal(got[1], B[1])

    def test_recover_rank_deficient(self, e8_code):
        x = np.zeros(8)
        eqs = [(x, np.array([1, 1])), (x, np.array([2, 2]))]
        with pytest.raises(ValueError):
            recover_messages(eqs, 2, e8_code)

    def test_sample_fading_unit_norm(self, rng):
        for L in (2, 3):
            h = sample_fading(rng, L)
            assert np.linalg.norm(h) == pytest.approx(1.0)
            assert np.all(h > 0)
