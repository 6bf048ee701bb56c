"""Undetected-error probability of CRC-embedded lattices.

Three routes: conditional Monte Carlo over genie-identified decoding errors,
the kissing-set ratio |T intersect Lambda'| / |T| (exact rational), and the
parity-length estimate 2^-l.  Also the exhaustive CRC polynomial search that
minimizes the kissing estimate for a given parity length.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import lattices
from ._rng import iter_blocks
from .codes import mmse_alpha
from .embed import CrcSpec, lsb
from .retry import _random_messages, wilson_ci


def p_ud_parity(l):
    """Fraction of lattice points with valid LSBs: 2^-l."""
    if l < 0:
        raise ValueError("l must be nonnegative")
    return Fraction(1, 2**l)


def _kissing_lsbs(lattice):
    pts = lattices.kissing_set(lattice)
    B = np.linalg.solve(lattice.G, pts.T).T
    Bi = np.round(B)
    assert np.max(np.abs(B - Bi)) < 1e-6
    return lsb(Bi.astype(np.int64))


def p_ud_kissing(lattice, member):
    """|T intersect Lambda'| / |T| with `member` an LSB-vector membership test."""
    L = _kissing_lsbs(lattice)
    hits = sum(1 for v in L if member(v))
    return Fraction(hits, len(L))


def all_crc_polynomials(l):
    """Degree-l binary polynomials with nonzero constant term, ascending value."""
    if l < 1:
        raise ValueError("l must be >= 1")
    out = []
    for p in range(2 ** (l - 1)):
        bits = (1,) + tuple((p >> (l - 2 - j)) & 1 for j in range(l - 1)) + (1,)
        out.append(CrcSpec(bits))
    return out


def crc_poly_search(l, lattice):
    """CRC polynomial of degree l minimizing the kissing estimate.

    Exhaustive over the 2^(l-1) candidates; ties go to the numerically
    smallest polynomial (the enumeration is already in ascending order).
    """
    L = _kissing_lsbs(lattice)
    best = None
    best_frac = None
    for spec in all_crc_polynomials(l):
        ok = spec.check_batch(L)
        frac = Fraction(int(np.sum(ok)), len(L))
        if best_frac is None or frac < best_frac:
            best, best_frac = spec, frac
    return best, best_frac


def collect_error_lsbs(code, snr_db, trials, seed=0, min_errors=100, power=None):
    """LSB vectors of the coordinate error G_c^-1 (x_hat - x) over genie errors.

    All-zero codeword transmitted (by linearity); the one-shot alpha_MMSE
    decoder is used.  The same pool serves every CRC length/polynomial."""
    P = code.average_power() if power is None else power
    sigma2 = code.sigma2_for_snr(snr_db, P)
    a = mmse_alpha(P, sigma2)
    x0 = np.zeros(code.N)
    pools = []
    n_err = 0
    for _i, n, rng in iter_blocks(seed, trials, block=16384):
        Y = rng.normal(0.0, np.sqrt(sigma2), size=(n, code.N))
        Xh = code.su_decode_batch(Y, a)
        bad = ~np.all(np.abs(Xh) < 1e-9, axis=1)
        if np.any(bad):
            Bh = np.round(np.linalg.solve(code.lattice.G, Xh[bad].T)).T
            pools.append(lsb(Bh.astype(np.int64)))
            n_err += int(np.sum(bad))
    if n_err < min_errors:
        raise RuntimeError("insufficient error events: %d < %d" % (n_err, min_errors))
    return np.concatenate(pools), trials


def p_ud_monte_carlo(code, crcspec, snr_db, trials, seed=0, min_errors=100, error_lsbs=None):
    """Pr(x_hat in Lambda' | x_hat != x) by conditional Monte Carlo."""
    if error_lsbs is None:
        error_lsbs, _ = collect_error_lsbs(code, snr_db, trials, seed, min_errors)
    ok = int(np.sum(crcspec.check_batch(error_lsbs)))
    n = len(error_lsbs)
    return ok / n, wilson_ci(ok, n)


@dataclass
class PudReport:
    l: int
    polynomial: str
    monte_carlo: float
    mc_ci: tuple
    kissing_estimate: Fraction
    parity_estimate: Fraction
    snr_db: float


def pud_table(code, snr_db, lengths, trials, seed=0):
    """Table-style report over CRC lengths with a shared error-event pool."""
    errs, _ = collect_error_lsbs(code, snr_db, trials, seed)
    rows = []
    for l in lengths:
        spec, frac = crc_poly_search(l, code.lattice)
        mc, ci = p_ud_monte_carlo(code, spec, snr_db, trials, error_lsbs=errs)
        rows.append(
            PudReport(l, str(spec), mc, ci, frac, p_ud_parity(l), snr_db)
        )
    return rows
