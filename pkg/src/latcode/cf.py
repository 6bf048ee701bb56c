"""Compute-forward relaying (incomplete CF, power-unconstrained relay).

The relay decodes integer linear combinations sum_i a_i x_i of the users'
codewords without the shaping modulo.  Candidates (a, alpha) are ranked by
computation rate; retry decoding walks the list until the embedded parity
check (valid for even nesting matrices) or a genie accepts the combination.
"""

from dataclasses import dataclass

import numpy as np

from . import lattices
from ._rng import iter_blocks
from .codes import mmse_alpha
from .embed import check_even_nesting, lsb
from .retry import _crc_tables, _random_messages

RATE_CAP = 60.0  # bits; stands in for the infinite rate of a noiseless match


def computation_rate(h, a, P, sigma2):
    """Alpha-maximized computation rate (log+ form); capped at RATE_CAP."""
    h = np.asarray(h, dtype=float)
    a = np.asarray(a, dtype=float)
    if not np.any(a):
        raise ValueError("a must be nonzero")
    denom = float(a @ a) - P * float(h @ a) ** 2 / (sigma2 + P * float(h @ h))
    if denom <= 2.0 ** (-2 * RATE_CAP):
        return RATE_CAP
    return max(0.0, 0.5 * np.log2(1.0 / denom))


def optimal_alpha(h, a, P, sigma2):
    """Rate-maximizing scaling alpha = P h.a / (sigma^2 + P |h|^2)."""
    h = np.asarray(h, dtype=float)
    a = np.asarray(a, dtype=float)
    if not np.any(a):
        raise ValueError("a must be nonzero")
    return P * float(h @ a) / (sigma2 + P * float(h @ h))


@dataclass
class CfCandidate:
    a: np.ndarray
    alpha: float
    rate: float


def _integer_sphere(L, radius2):
    """All nonzero integer vectors with squared norm < radius2, ordered by
    increasing norm then lexicographically."""
    r = int(np.floor(np.sqrt(max(0.0, radius2 - 1e-12))))
    if r < 1:
        return []
    rng = range(-r, r + 1)
    pts = []
    grid = np.meshgrid(*([list(rng)] * L), indexing="ij")
    A = np.stack([g.ravel() for g in grid], axis=1)
    n2 = np.sum(A * A, axis=1)
    keep = (n2 > 0) & (n2 < radius2)
    A = A[keep]
    n2 = n2[keep]
    order = np.lexsort(tuple(A[:, i] for i in range(L - 1, -1, -1)) + (n2,))
    return [a for a in A[order]]


def enumerate_candidates(h, P, sigma2, k):
    """Top-k candidate list sorted by decreasing computation rate.

    Enumerates the sphere ||a||^2 < 1 + ||h||^2 P / sigma^2, which is exactly
    the set of coefficient vectors with non-zero computation rate (the
    unit-noise-variance statement of this radius is sigma^2 + ||h||^2 P);
    then drops negations and nontrivial integer multiples of earlier
    (higher-ranked) members: they give no new information at the relay.
    """
    h = np.asarray(h, dtype=float)
    radius2 = 1.0 + float(h @ h) * P / sigma2
    raw = _integer_sphere(len(h), radius2)
    if not raw:
        raise ValueError("empty candidate set: sphere radius below 1")
    scored = []
    for a in raw:
        scored.append((computation_rate(h, a, P, sigma2), -float(a @ a), a))
    # descending rate; ties broken by smaller norm
    scored.sort(key=lambda t: (-t[0], -t[1]))
    kept = []
    for rate, _negn2, a in scored:
        redundant = False
        for prev in kept:
            pa = prev.a
            # a == m * pa or a == -m * pa for integer m?
            nz = np.flatnonzero(pa)
            if nz.size and np.all(a[pa == 0] == 0):
                q = a[nz[0]] / pa[nz[0]]
                if q != 0 and float(q).is_integer() and np.all(a == q * pa):
                    redundant = True
                    break
        if not redundant:
            kept.append(CfCandidate(np.asarray(a), optimal_alpha(h, a, P, sigma2), rate))
        if len(kept) == k:
            break
    return kept


def icf_decode(code, y, alpha):
    """Relay decode without the shaping modulo: Q_{Lambda_c}(alpha y)."""
    return lattices.nearest_point(code.lattice, alpha * np.asarray(y, dtype=float))


def relay_retry(code, y, candidates, checker):
    """Sequential candidate attempts; first checker pass wins.

    Returns (x_hat, a, attempts) or (None, None, attempts) on failure."""
    attempts = 0
    for cand in candidates:
        attempts += 1
        xh = icf_decode(code, y, cand.alpha)
        if checker(xh, cand.a):
            return xh, cand.a, attempts
    return None, None, attempts


def crc_combination_checker(code, crcspec):
    """Parity check on G_c^-1 x mod 2; requires an even nesting matrix."""
    if not check_even_nesting(code):
        raise ValueError("CRC checking of CF combinations needs an even nesting matrix")

    def checker(xh, a):
        b = code.lattice.coords(xh)
        bi = np.round(b)
        if np.max(np.abs(b - bi)) > 1e-9:
            return False
        return crcspec.check(lsb(bi.astype(np.int64)))

    return checker


def sample_fading(rng, L=2):
    """Unit-norm channel vector with i.i.d. Rayleigh components."""
    g = rng.normal(size=(L, 2))
    h = np.sqrt(np.sum(g * g, axis=1))
    return h / np.linalg.norm(h)


def recover_messages(equations, L, code):
    """Solve the real linear system {x_hat_j = sum_i a_ji x_i} for the users.

    `equations` is a list of (x_hat, a) pairs; the coefficient matrix must
    have rank L over the reals.  Returns the recovered uncoded messages.
    """
    A = np.array([a for _x, a in equations], dtype=float)
    X = np.array([x for x, _a in equations], dtype=float)
    if np.linalg.matrix_rank(A) < L:
        raise ValueError("coefficient matrix is rank deficient")
    sol, *_ = np.linalg.lstsq(A, X, rcond=None)
    return [code.index(sol[i]) for i in range(L)]


def simulate_relay(
    code,
    snr_db,
    trials,
    seed=0,
    n_candidates=2,
    crcspec=None,
    L=2,
    power=None,
    h=None,
    block_indices=None,
):
    """Paired one-shot vs retry EER at a relay with Rayleigh fading.

    The channel is redrawn per codeword unless a fixed vector `h` is given
    (with per-codeword unit-norm Rayleigh fading the EER is dominated by
    channel outage, so noise-limited operating points need a fixed channel);
    the same noise draw feeds both the one-shot decoder (top-rate candidate
    only) and the k-candidate retry decoder, so the comparison is paired.
    Returns aggregate counts.
    """
    h_fixed = None if h is None else np.asarray(h, dtype=float)
    P = code.average_power() if power is None else power
    sigma2 = code.sigma2_for_snr(snr_db, P)
    sigma = np.sqrt(sigma2)
    crc = _crc_tables(code, crcspec) if crcspec is not None else None
    if crc is not None and not check_even_nesting(code):
        raise ValueError("CRC checking of CF combinations needs an even nesting matrix")
    err_oneshot = 0
    err_retry = 0
    attempts_total = 0
    trials_done = 0
    for _bi, n, rng in iter_blocks(seed, trials, block=512, indices=block_indices):
        trials_done += n
        cands_fixed = (
            enumerate_candidates(h_fixed, P, sigma2, n_candidates)
            if h_fixed is not None
            else None
        )
        for _t in range(n):
            h = sample_fading(rng, L) if h_fixed is None else h_fixed
            B = _random_messages(code, L, rng, crc=crc)
            X = code.encode_batch(B)
            y = h @ X + rng.normal(0.0, sigma, size=code.N)
            cands = cands_fixed if cands_fixed is not None else enumerate_candidates(h, P, sigma2, n_candidates)
            truth = {}

            def genie_or_crc(xh, a):
                key = tuple(int(v) for v in a)
                if key not in truth:
                    truth[key] = np.asarray(a, dtype=float) @ X
                correct = bool(np.all(np.abs(xh - truth[key]) < 1e-9))
                if crc is None:
                    return correct
                b = code.lattice.coords(xh)
                bi = np.round(b)
                if np.max(np.abs(b - bi)) > 1e-9:
                    return False
                return bool(crc["spec"].check(lsb(bi.astype(np.int64))))

            # one-shot: top candidate only
            x1 = icf_decode(code, y, cands[0].alpha)
            t1 = cands[0].a.astype(float) @ X
            if not np.all(np.abs(x1 - t1) < 1e-9):
                err_oneshot += 1
            xh, a, att = relay_retry(code, y, cands, genie_or_crc)
            attempts_total += att
            if xh is None:
                err_retry += 1
            else:
                if not np.all(np.abs(xh - (a.astype(float) @ X)) < 1e-9):
                    err_retry += 1
    return {
        "trials": trials_done,
        "err_oneshot": err_oneshot,
        "err_retry": err_retry,
        "attempts": attempts_total,
    }
