"""Semi-analytic retry error model and CRC length optimization.

The retry error tree gives, for k decoding levels,

    P_e^(i)       = P_re^(i) * P_e^(i-1) * (1 - P_ud)          (i > 1)
    P_e_total^(k) = sum_{i<k} P_e^(i) * P_ud
                    + P_re^(k) * P_e^(k-1) * (1 - P_ud)

so WER-vs-SNR curves for every CRC length follow from one set of measured
P_e^(1), P_re^(i) curves plus the map l -> P_ud.  The optimizer turns these
into per-l SNR gains at a target error rate, net of the embedding SNR penalty.
"""

from dataclasses import dataclass

import numpy as np

from .embed import snr_penalty_db
from .pud import p_ud_parity


@dataclass
class RetryErrorModel:
    """P_e^(1) and conditional retry error probabilities for one SNR point."""

    p_e1: float
    p_re: list  # p_re[i-2] is P_re^(i) for i = 2..k
    source: str = "measured"

    @property
    def k(self):
        return 1 + len(self.p_re)


def estimate_p_e_total(model, p_ud, k):
    """Total WER after k retry levels under the detection-gated error tree."""
    if not (0.0 <= p_ud <= 1.0):
        raise ValueError("p_ud must be a probability")
    if k < 2:
        raise ValueError("retry estimate needs k >= 2 (k=1 is just P_e^(1))")
    if k > model.k:
        raise ValueError("model only populated through level %d" % model.k)
    p_e = [model.p_e1]
    for i in range(2, k + 1):
        p_e.append(model.p_re[i - 2] * p_e[-1] * (1.0 - p_ud))
    total = sum(p_e[i - 1] * p_ud for i in range(1, k))
    total += model.p_re[k - 2] * p_e[k - 2] * (1.0 - p_ud)
    return total


def derive_su_model(p_e1, alist):
    """Build the model from the offline search conditionals.

    P_re^(i) = 1 - sum_j P(alpha_ij | e_{i-1}); needs no extra Monte Carlo and
    is independent of the embedded CRC code."""
    if len(alist.conditionals) < 2:
        raise ValueError("candidate list has no retry levels")
    p_re = [max(0.0, 1.0 - sum(cond)) for cond in alist.conditionals[1:]]
    return RetryErrorModel(p_e1, p_re, source="derived_from_alpha_conditionals")


def measure_p_re(log, i):
    """Ratio estimator P_re^(i) = P_e^(i) / P_e,CRC^(i-1) from simulation logs.

    `log` is the dict produced by retry.simulate_retry; with a genie checker
    the denominator equals the level-(i-1) error count."""
    if i < 2:
        raise ValueError("P_re is defined for levels i >= 2")
    num = int(log["level_errors"][i - 1])
    den = int(log["level_active"][i - 2])
    if den == 0:
        raise ZeroDivisionError("no detected errors at level %d" % (i - 1))
    return num / den


def _interp_snr_at_target(snrs, wers, target):
    """SNR achieving the target error rate, log-linear between sweep points."""
    snrs = np.asarray(snrs, dtype=float)
    lw = np.log10(np.maximum(np.asarray(wers, dtype=float), 1e-300))
    lt = np.log10(target)
    order = np.argsort(snrs)
    snrs, lw = snrs[order], lw[order]
    for j in range(len(snrs) - 1):
        a, b = lw[j], lw[j + 1]
        if (a - lt) * (b - lt) <= 0 and a != b:
            return snrs[j] + (snrs[j + 1] - snrs[j]) * (a - lt) / (a - b)
    raise ValueError("target %.3g not bracketed by the sweep" % target)


@dataclass
class GainRow:
    l: int
    p_ud: float
    snr_at_target: float
    penalty_db: float
    gain_db: float
    polynomial: str = ""


@dataclass
class GainReport:
    target: float
    rows: list
    best_l: int | None
    best_gain_db: float
    genie_gain_db: float  # P_ud = 0 upper bound, no penalty


def optimize_crc_length(models_by_snr, target, l_range, N, R, k=None, pud_map=None, polys=None):
    """Pick the CRC length maximizing the SNR gain at the target error rate.

    models_by_snr: {snr_db: RetryErrorModel} sweep (R-independent curves);
    pud_map: optional {l: P_ud} override (defaults to the 2^-l estimate);
    gain(l) = SNR(one-shot baseline at target) - SNR(l-curve at target)
              - snr_penalty(R, l, N).
    """
    snrs = sorted(models_by_snr)
    models = [models_by_snr[s] for s in snrs]
    k = k or models[0].k
    base = _interp_snr_at_target(snrs, [m.p_e1 for m in models], target)
    genie = _interp_snr_at_target(
        snrs, [estimate_p_e_total(m, 0.0, k) for m in models], target
    )
    rows = []
    for l in l_range:
        p_ud = float(pud_map[l]) if pud_map else float(p_ud_parity(l))
        curve = [estimate_p_e_total(m, p_ud, k) for m in models]
        snr_l = _interp_snr_at_target(snrs, curve, target)
        pen = snr_penalty_db(R, l, N)
        rows.append(
            GainRow(
                l=l,
                p_ud=p_ud,
                snr_at_target=snr_l,
                penalty_db=pen,
                gain_db=base - snr_l - pen,
                polynomial=(polys or {}).get(l, ""),
            )
        )
    best = max(rows, key=lambda r: r.gain_db)
    best_l = best.l if best.gain_db > 0 else None
    return GainReport(
        target=target,
        rows=rows,
        best_l=best_l,
        best_gain_db=best.gain_db,
        genie_gain_db=base - genie,
    )
