"""Single-user retry decoding.

Offline part: genie-aided search for the scaling-factor candidate list
A_1..A_k (level i holds 2^(i-1) candidates, one per interval between the
already-found candidates and the search bounds).  Online part: sequential
decoding attempts gated by an error detector (CRC parity check or genie).
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from ._rng import BLOCK, iter_blocks
from .codes import mmse_alpha
from .embed import lsb


@dataclass
class AlphaCandidateList:
    snr_db: float
    bounds: tuple
    levels: list = field(default_factory=list)  # level i: list of 2^(i-1) alphas
    conditionals: list = field(default_factory=list)  # matching P(alpha | e_{i-1})

    def flat(self):
        return [a for lv in self.levels for a in lv]

    def save(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["version", "snr_db", "alpha_min", "alpha_max"])
            w.writerow([1, self.snr_db, self.bounds[0], self.bounds[1]])
            w.writerow(["level", "index", "alpha", "conditional_success"])
            for i, lv in enumerate(self.levels):
                for j, a in enumerate(lv):
                    w.writerow([i + 1, j + 1, repr(a), repr(self.conditionals[i][j])])

    @classmethod
    def load(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        _, snr, lo, hi = rows[1]
        out = cls(float(snr), (float(lo), float(hi)))
        for lvl, _idx, a, p in rows[3:]:
            lvl = int(lvl)
            while len(out.levels) < lvl:
                out.levels.append([])
                out.conditionals.append([])
            out.levels[lvl - 1].append(float(a))
            out.conditionals[lvl - 1].append(float(p))
        return out


@dataclass
class RetryOutcome:
    result: object  # decoded message (np array) or None on declared failure
    attempts: int
    level_reached: int


def _random_messages(code, n, rng, crc=None):
    """Random uncoded messages; CRC-encoded into the embedded code when given."""
    B = np.column_stack([rng.integers(0, m, size=n) for m in code.moduli])
    if crc is not None:
        Gb = crc["Gb"]
        k = Gb.shape[1]
        B[:, k:] -= B[:, k:] % 2  # clear payload from parity positions
        C = (lsb(B[:, :k]) @ Gb.T) % 2
        B[:, k:] += C[:, k:]
    return B


def _crc_tables(code, crcspec):
    binc = crcspec.to_binary_code(code.N)
    return {"Gb": binc.Gb, "spec": crcspec}


def _decode_messages(code, Y, alpha):
    Xh = code.su_decode_batch(Y, alpha)
    Bh = np.round(np.linalg.solve(code.lattice.G, Xh.T)).T.astype(np.int64)
    return Xh, Bh


def p_correct(code, snr_db, alpha, trials, seed=0, power=None):
    """Monte Carlo estimate of Pr(decode(alpha*y) == x) with Wilson 95% CI."""
    sigma2 = code.sigma2_for_snr(snr_db, power)
    ok = 0
    for _i, n, rng in iter_blocks(seed, trials):
        B = _random_messages(code, n, rng)
        X = code.encode_batch(B)
        Y = X + rng.normal(0.0, np.sqrt(sigma2), size=X.shape)
        Xh = code.su_decode_batch(Y, alpha)
        ok += int(np.sum(np.all(np.abs(Xh - X) < 1e-9, axis=1)))
    p = ok / trials
    return p, wilson_ci(ok, trials)


def wilson_ci(successes, trials, z=1.96):
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    den = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / den
    half = z * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return (max(0.0, centre - half), min(1.0, centre + half))


def _conditioned_pool(code, snr_db, prior_alphas, n_wanted, seed, max_raw=None, power=None):
    """Noise draws (with their codewords) on which every prior candidate fails."""
    sigma2 = code.sigma2_for_snr(snr_db, power)
    sigma = np.sqrt(sigma2)
    Xs, Ys = [], []
    got = 0
    raw = 0
    max_raw = max_raw or 500_000_000
    for _i, n, rng in iter_blocks(seed, max_raw, block=4 * BLOCK):
        B = _random_messages(code, n, rng)
        X = code.encode_batch(B)
        Y = X + rng.normal(0.0, sigma, size=X.shape)
        bad = np.ones(n, dtype=bool)
        for a in prior_alphas:
            Xh = code.su_decode_batch(Y[bad], a)
            still = ~np.all(np.abs(Xh - X[bad]) < 1e-9, axis=1)
            idx = np.flatnonzero(bad)
            bad[idx[~still]] = False
            if not np.any(bad):
                break
        raw += n
        if np.any(bad):
            Xs.append(X[bad])
            Ys.append(Y[bad])
            got += int(np.sum(bad))
        if got >= n_wanted:
            break
    if got < n_wanted:
        raise RuntimeError(
            "conditioning event too rare: %d/%d draws after %d raw trials" % (got, n_wanted, raw)
        )
    X = np.concatenate(Xs)[:n_wanted]
    Y = np.concatenate(Ys)[:n_wanted]
    return X, Y, raw


def _empirical_p(code, X, Y, alpha):
    Xh = code.su_decode_batch(Y, alpha)
    return float(np.mean(np.all(np.abs(Xh - X) < 1e-9, axis=1)))


def _maximize_on_interval(code, X, Y, lo, hi, grid=400, golden_iters=20):
    """Grid scan + golden-section refinement of the empirical success rate.

    Common random numbers: the pool (X, Y) is shared by every evaluated alpha,
    so the argmax is a smooth function of the grid.
    """
    alphas = np.linspace(lo, hi, grid + 1)[1:-1]
    vals = np.array([_empirical_p(code, X, Y, a) for a in alphas])
    j = int(np.argmax(vals))
    a_lo = alphas[max(0, j - 1)]
    a_hi = alphas[min(len(alphas) - 1, j + 1)]
    inv = (np.sqrt(5) - 1) / 2
    x1 = a_hi - inv * (a_hi - a_lo)
    x2 = a_lo + inv * (a_hi - a_lo)
    f1 = _empirical_p(code, X, Y, x1)
    f2 = _empirical_p(code, X, Y, x2)
    for _ in range(golden_iters):
        if f1 < f2:
            a_lo, x1, f1 = x1, x2, f2
            x2 = a_lo + inv * (a_hi - a_lo)
            f2 = _empirical_p(code, X, Y, x2)
        else:
            a_hi, x2, f2 = x2, x1, f1
            x1 = a_hi - inv * (a_hi - a_lo)
            f1 = _empirical_p(code, X, Y, x1)
    best_a = x1 if f1 >= f2 else x2
    best_v = max(f1, f2, vals[j])
    if vals[j] >= best_v:
        best_a = alphas[j]
    return float(best_a), float(best_v)


def search_candidates(
    code,
    snr_db,
    n_levels,
    bounds,
    seed=0,
    pool_level1=100_000,
    conditioned_floor=2000,
    conditioned_pool=20_000,
    grid=400,
    max_raw=None,
):
    """Offline genie-aided search for the alpha candidate list.

    Level 1 maximizes the unconditioned success probability; the empirical
    curve is flat near its maximum, so the candidate snaps to alpha_MMSE when
    the two are statistically indistinguishable (they always have been).
    Level k+1 places one candidate in each interval between the sorted prior
    candidates and the bounds (2^k intervals), maximizing the success
    probability given that every prior candidate failed (rejection sampling).
    The argmax runs on one half of the conditioned pool and the reported
    conditional success probability comes from the other half, so the
    estimates carry no selection bias.
    """
    lo, hi = bounds
    alist = AlphaCandidateList(snr_db, (float(lo), float(hi)))
    P = code.average_power()
    a_mmse = mmse_alpha(P, code.sigma2_for_snr(snr_db, P))
    for level in range(1, n_levels + 1):
        prior = alist.flat()
        if level == 1:
            X, Y, _ = _conditioned_pool(
                code, snr_db, [], pool_level1, seed, max_raw=pool_level1, power=None
            )
            a, v = _maximize_on_interval(code, X, Y, lo, hi, grid=grid)
            if lo < a_mmse < hi:
                vm = _empirical_p(code, X, Y, a_mmse)
                se = np.sqrt(max(v * (1 - v), 1e-12) / len(X))
                if v - vm <= 2 * se:
                    a, v = a_mmse, vm
            alist.levels.append([float(a)])
            alist.conditionals.append([float(v)])
            continue
        n_pool = max(int(conditioned_floor), int(conditioned_pool))
        X, Y, _ = _conditioned_pool(
            code, snr_db, prior, n_pool, seed + level, max_raw=max_raw
        )
        knots = sorted(set([lo, hi] + prior))
        cands, conds = [], []
        for a_lo, a_hi in zip(knots[:-1], knots[1:]):
            a, v = _maximize_on_interval(code, X[0::2], Y[0::2], a_lo, a_hi, grid=grid)
            v = _empirical_p(code, X[1::2], Y[1::2], a)
            if v > 0.0:
                cands.append(a)
                conds.append(v)
        alist.levels.append(cands)
        alist.conditionals.append(conds)
    return alist


def retry_decode(code, y, alist, checker):
    """Sequential attempts over the candidate list, first checker pass wins."""
    attempts = 0
    for li, level in enumerate(alist.levels):
        for a in level:
            attempts += 1
            xh, bh = code.su_decode(y, a)
            if checker(bh):
                return RetryOutcome(bh, attempts, li + 1)
    return RetryOutcome(None, attempts, len(alist.levels))


def exhaustive_genie_decode(code, y, x_true, bounds, n_candidates):
    """Empirical ceiling: does any of n uniformly spaced alphas decode x_true?"""
    for a in np.linspace(bounds[0], bounds[1], n_candidates):
        xh = code.su_decode_batch(np.asarray(y, dtype=float)[None, :], a)[0]
        if np.all(np.abs(xh - np.asarray(x_true)) < 1e-9):
            return True
    return False


def simulate_oneshot(code, snr_db, trials, seed=0, alpha=None, power=None,
                     block_indices=None):
    """One-shot WER at alpha (default alpha_MMSE).  Returns (errors, trials)."""
    P = code.average_power() if power is None else power
    sigma2 = code.sigma2_for_snr(snr_db, P)
    a = mmse_alpha(P, sigma2) if alpha is None else alpha
    errs = 0
    done = 0
    for _i, n, rng in iter_blocks(seed, trials, indices=block_indices):
        B = _random_messages(code, n, rng)
        X = code.encode_batch(B)
        Y = X + rng.normal(0.0, np.sqrt(sigma2), size=X.shape)
        Xh = code.su_decode_batch(Y, a)
        errs += int(np.sum(~np.all(np.abs(Xh - X) < 1e-9, axis=1)))
        done += n
    return errs, done


def simulate_retry(code, snr_db, alist, trials, seed=0, crcspec=None, power=None,
                   block_indices=None):
    """Multi-level retry simulation (vectorized over trial blocks).

    checker: CRC parity on the indexed message when `crcspec` is given,
    otherwise a genie (compares against the transmitted codeword).  Returns a
    dict of aggregate counts:
      per-attempt `attempt_errors[j]`: trials still wrong after attempt j
      `undetected`: trials that returned a wrong message that passed the check
      `failures`: trials exhausting all attempts without a pass
      `total_errors`: undetected + wrong-or-failed outcomes
    """
    P = code.average_power() if power is None else power
    sigma2 = code.sigma2_for_snr(snr_db, P)
    alphas = alist.flat()
    crc = _crc_tables(code, crcspec) if crcspec is not None else None
    n_att = len(alphas)
    level_ends = np.cumsum([len(lv) for lv in alist.levels]) - 1
    n_lv = len(alist.levels)
    att_err = np.zeros(n_att, dtype=np.int64)
    att_reached = np.zeros(n_att, dtype=np.int64)
    level_err = np.zeros(n_lv, dtype=np.int64)  # error state after each level
    level_active = np.zeros(n_lv, dtype=np.int64)  # still retrying after each level
    undetected = 0
    failures = 0
    total_err = 0
    trials_done = 0
    for _i, n, rng in iter_blocks(seed, trials, indices=block_indices):
        trials_done += n
        B = _random_messages(code, n, rng, crc=crc)
        X = code.encode_batch(B)
        Y = X + rng.normal(0.0, np.sqrt(sigma2), size=X.shape)
        active = np.arange(n)
        wrong_final = np.zeros(n, dtype=bool)
        done = np.zeros(n, dtype=bool)
        for j, a in enumerate(alphas):
            if active.size:
                att_reached[j] += active.size
                Xh, Bh = _decode_messages(code, Y[active], a)
                correct = np.all(np.abs(Xh - X[active]) < 1e-9, axis=1)
                if crc is not None:
                    U = code.index_from_coords_batch(Bh)
                    passed = crc["spec"].check_batch(lsb(U))
                else:
                    passed = correct
                att_err[j] += int(np.sum(~correct))
                newly_done = passed
                wrong_final[active[newly_done & ~correct]] = True
                done[active[newly_done]] = True
                active = active[~newly_done]
            at_end = np.flatnonzero(level_ends == j)
            if at_end.size:
                li = int(at_end[0])
                level_err[li] += int(np.sum(wrong_final)) + int(active.size)
                level_active[li] += int(active.size)
        undetected += int(np.sum(wrong_final))
        failures += int(active.size)
        total_err += int(np.sum(wrong_final)) + int(active.size)
    return {
        "trials": trials_done,
        "attempt_errors": att_err,
        "attempt_reached": att_reached,
        "level_errors": level_err,
        "level_active": level_active,
        "undetected": undetected,
        "failures": failures,
        "total_errors": total_err,
    }


def simulate_exhaustive_genie(code, snr_db, bounds, n_candidates, trials, seed=0,
                              power=None, block_indices=None):
    """WER of the genie-aided exhaustive decoder over n uniformly spaced alphas.

    A trial errs only when no candidate decodes the transmitted codeword.
    Candidates are visited nearest-to-alpha_MMSE first, so nearly all trials
    exit on the first attempt.
    """
    P = code.average_power() if power is None else power
    sigma2 = code.sigma2_for_snr(snr_db, P)
    a_mmse = mmse_alpha(P, sigma2)
    alphas = np.linspace(bounds[0], bounds[1], n_candidates)
    alphas = alphas[np.argsort(np.abs(alphas - a_mmse))]
    errs = 0
    done = 0
    for _i, n, rng in iter_blocks(seed, trials, indices=block_indices):
        B = _random_messages(code, n, rng)
        X = code.encode_batch(B)
        Y = X + rng.normal(0.0, np.sqrt(sigma2), size=X.shape)
        active = np.arange(n)
        for a in alphas:
            if active.size == 0:
                break
            Xh = code.su_decode_batch(Y[active], a)
            ok = np.all(np.abs(Xh - X[active]) < 1e-9, axis=1)
            active = active[~ok]
        errs += int(active.size)
        done += n
    return errs, done
