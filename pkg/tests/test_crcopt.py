"""Retry error-rate recursion and CRC length optimization."""

import numpy as np
import pytest

from latcode.crcopt import (
    RetryErrorModel,
    derive_su_model,
    estimate_p_e_total,
    measure_p_re,
    optimize_crc_length,
)
from latcode.embed import snr_penalty_db
from latcode.retry import AlphaCandidateList


class TestRecursion:
    def test_two_level_by_hand(self):
        m = RetryErrorModel(p_e1=1e-2, p_re=[0.5])
        p_ud = 1.0 / 8
        # P_e^(2) = P_re * P_e^(1) * (1-P_ud); total = P_e^(1) P_ud + P_e^(2)
        want = 1e-2 * p_ud + 0.5 * 1e-2 * (1 - p_ud)
        assert estimate_p_e_total(m, p_ud, 2) == pytest.approx(want)

    def test_three_level_by_hand(self):
        m = RetryErrorModel(p_e1=1e-2, p_re=[0.5, 0.4])
        p_ud = 0.1
        p2 = 0.5 * 1e-2 * 0.9
        p3 = 0.4 * p2 * 0.9
        want = 1e-2 * 0.1 + p2 * 0.1 + p3
        assert estimate_p_e_total(m, p_ud, 3) == pytest.approx(want)

    def test_genie_limit(self):
        # P_ud = 0: total is p_e1 * prod(p_re)
        m = RetryErrorModel(p_e1=2e-3, p_re=[0.5, 0.4])
        assert estimate_p_e_total(m, 0.0, 3) == pytest.approx(2e-3 * 0.5 * 0.4)

    def test_no_detection_limit(self):
        # P_ud = 1: retry never fires, total is p_e1
        m = RetryErrorModel(p_e1=2e-3, p_re=[0.5])
        assert estimate_p_e_total(m, 1.0, 2) == pytest.approx(2e-3)

    def test_validation(self):
        m = RetryErrorModel(p_e1=1e-2, p_re=[0.5])
        with pytest.raises(ValueError):
            estimate_p_e_total(m, -0.1, 2)
        with pytest.raises(ValueError):
            estimate_p_e_total(m, 0.1, 1)
        with pytest.raises(ValueError):
            estimate_p_e_total(m, 0.1, 3)


class TestModelSources:
    def test_derive_from_conditionals(self):
        alist = AlphaCandidateList(
            17.0,
            (0.5, 1.5),
            levels=[[0.98], [0.91, 1.05]],
            conditionals=[[0.996], [0.25, 0.30]],
        )
        m = derive_su_model(3e-3, alist)
        assert m.p_e1 == 3e-3
        assert m.p_re == [pytest.approx(0.45)]

    def test_measure_p_re(self):
        log = {"level_errors": np.array([120, 54]), "level_active": np.array([118, 0])}
        assert measure_p_re(log, 2) == pytest.approx(54 / 118)
        with pytest.raises(ValueError):
            measure_p_re(log, 1)

    def test_measure_p_re_no_denominator(self):
        log = {"level_errors": np.array([0, 0]), "level_active": np.array([0, 0])}
        with pytest.raises(ZeroDivisionError):
            measure_p_re(log, 2)


class TestOptimizer:
    @staticmethod
    def synthetic_models(slope_db=1.0):
        # clean exponential waterfall: one-shot decade per slope_db dB
        snrs = np.arange(14.0, 20.5, 0.5)
        return {s: RetryErrorModel(10 ** (-(s - 12.0) / slope_db), [0.5]) for s in snrs}

    def test_gain_accounting(self):
        models = self.synthetic_models()
        rep = optimize_crc_length(models, 1e-5, [2], N=8, R=4)
        row = rep.rows[0]
        base = 17.0  # 10^-(s-12) hits 1e-5 at s = 17
        assert row.gain_db == pytest.approx(base - row.snr_at_target - row.penalty_db)
        assert row.penalty_db == pytest.approx(snr_penalty_db(4, 2, 8))

    def test_large_l_never_helps_small_k(self):
        # with 1 dB/decade and k=2 the best possible genie gain is ~0.3 dB,
        # so an l=8 embedding at N=8, R=2 must come out negative
        models = self.synthetic_models()
        rep = optimize_crc_length(models, 1e-5, [8], N=8, R=2)
        assert rep.rows[0].gain_db < 0

    def test_best_l_none_when_all_negative(self):
        models = self.synthetic_models()
        rep = optimize_crc_length(models, 1e-5, range(4, 9), N=8, R=2)
        assert rep.best_l is None

    def test_target_outside_sweep(self):
        models = self.synthetic_models()
        with pytest.raises(ValueError):
            optimize_crc_length(models, 1e-12, [3], N=8, R=8)
