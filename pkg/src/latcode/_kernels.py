"""Numba kernels: exact sphere decoding / enumeration and fast batch decoders.

Everything here works on plain float64 arrays so the hot simulation loops
stay allocation-free.  The sphere routines use Schnorr-Euchner style
depth-first enumeration on the R factor of a QR decomposition with the
diagonal of R normalized positive.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def se_closest(R, z, b_out):
    """min ||z - R b|| over integer b, R upper triangular with positive diagonal.

    Returns the best squared distance and fills b_out.  On (numerical) ties
    the lexicographically smallest b wins.
    """
    n = R.shape[0]
    e = np.zeros((n + 1, n))
    e[n, :] = z
    dist_k = np.zeros(n + 1)
    u = np.zeros(n)
    step = np.zeros(n)
    best = 1e300
    have = False
    b_cur = np.zeros(n)
    k = n - 1
    u[k] = np.round(e[n, k] / R[k, k])
    yy = e[n, k] - u[k] * R[k, k]
    step[k] = 1.0 if yy > 0 else -1.0
    while True:
        y = e[k + 1, k] - u[k] * R[k, k]
        newdist = dist_k[k + 1] + y * y
        if newdist < best + 1e-12:
            if k > 0:
                for j in range(k):
                    e[k, j] = e[k + 1, j] - u[k] * R[j, k]
                dist_k[k] = newdist
                k -= 1
                u[k] = np.round(e[k + 1, k] / R[k, k])
                yy = e[k + 1, k] - u[k] * R[k, k]
                step[k] = 1.0 if yy > 0 else -1.0
                continue
            else:
                if newdist < best - 1e-12:
                    best = newdist
                    for j in range(n):
                        b_cur[j] = u[j]
                    have = True
                elif have:
                    smaller = False
                    for j in range(n):
                        if u[j] < b_cur[j] - 1e-9:
                            smaller = True
                            break
                        elif u[j] > b_cur[j] + 1e-9:
                            break
                    if smaller:
                        for j in range(n):
                            b_cur[j] = u[j]
                u[k] += step[k]
                step[k] = -step[k] - (1.0 if step[k] > 0 else -1.0)
        else:
            if k == n - 1:
                break
            k += 1
            u[k] += step[k]
            step[k] = -step[k] - (1.0 if step[k] > 0 else -1.0)
    for j in range(n):
        b_out[j] = b_cur[j]
    return best


@njit(cache=True)
def enumerate_within(R, radius2, max_pts):
    """All nonzero integer b with ||R b||^2 <= radius2 (+small slack).

    Returns (count, out) where out[:count] holds the coefficient vectors.
    count == max_pts signals a truncated (overflowed) enumeration.
    """
    n = R.shape[0]
    out = np.zeros((max_pts, n))
    cnt = 0
    e = np.zeros((n + 1, n))
    dist_k = np.zeros(n + 1)
    u = np.zeros(n)
    step = np.zeros(n)
    k = n - 1
    u[k] = 0.0
    step[k] = 1.0
    while True:
        y = e[k + 1, k] - u[k] * R[k, k]
        newdist = dist_k[k + 1] + y * y
        if newdist <= radius2 + 1e-9:
            if k > 0:
                for j in range(k):
                    e[k, j] = e[k + 1, j] - u[k] * R[j, k]
                dist_k[k] = newdist
                k -= 1
                u[k] = np.round(e[k + 1, k] / R[k, k])
                yy = e[k + 1, k] - u[k] * R[k, k]
                step[k] = 1.0 if yy > 0 else -1.0
                continue
            else:
                nz = False
                for j in range(n):
                    if u[j] != 0.0:
                        nz = True
                        break
                if nz:
                    if cnt < max_pts:
                        for j in range(n):
                            out[cnt, j] = u[j]
                    cnt += 1
                u[k] += step[k]
                step[k] = -step[k] - (1.0 if step[k] > 0 else -1.0)
        else:
            if k == n - 1:
                break
            k += 1
            u[k] += step[k]
            step[k] = -step[k] - (1.0 if step[k] > 0 else -1.0)
    if cnt > max_pts:
        cnt = max_pts + 1
    return cnt, out


@njit(cache=True)
def shortest_norm2(R):
    """Squared norm of the shortest nonzero vector of the lattice R Z^n."""
    n = R.shape[0]
    best = 0.0
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += R[j, i] * R[j, i]
        if i == 0 or s < best:
            best = s
    # shrink the radius every time a shorter vector is found
    e = np.zeros((n + 1, n))
    dist_k = np.zeros(n + 1)
    u = np.zeros(n)
    step = np.zeros(n)
    k = n - 1
    u[k] = 0.0
    step[k] = 1.0
    while True:
        y = e[k + 1, k] - u[k] * R[k, k]
        newdist = dist_k[k + 1] + y * y
        if newdist <= best + 1e-9:
            if k > 0:
                for j in range(k):
                    e[k, j] = e[k + 1, j] - u[k] * R[j, k]
                dist_k[k] = newdist
                k -= 1
                u[k] = np.round(e[k + 1, k] / R[k, k])
                yy = e[k + 1, k] - u[k] * R[k, k]
                step[k] = 1.0 if yy > 0 else -1.0
                continue
            else:
                nz = False
                for j in range(n):
                    if u[j] != 0.0:
                        nz = True
                        break
                if nz and newdist < best - 1e-12:
                    best = newdist
                u[k] += step[k]
                step[k] = -step[k] - (1.0 if step[k] > 0 else -1.0)
        else:
            if k == n - 1:
                break
            k += 1
            u[k] += step[k]
            step[k] = -step[k] - (1.0 if step[k] > 0 else -1.0)
    return best


@njit(cache=True, inline="always")
def _round_hd(x):
    # round to nearest, halves toward -inf (lexicographically smaller winner)
    return np.ceil(x - 0.5)


@njit(cache=True)
def dn_decode_one(y, x_out):
    """Nearest point of D_n = {x in Z^n : sum x_i even}."""
    n = y.shape[0]
    s = 0.0
    worst = -1.0
    wi = 0
    for i in range(n):
        x_out[i] = _round_hd(y[i])
        s += x_out[i]
        err = abs(y[i] - x_out[i])
        if err > worst:
            worst = err
            wi = i
    if int(s) % 2 != 0:
        # flip the worst coordinate toward y
        if y[wi] > x_out[wi]:
            x_out[wi] += 1.0
        else:
            x_out[wi] -= 1.0


@njit(cache=True)
def e8_decode_batch(Y, X):
    """Nearest E8 point (standard frame, min squared norm 2) for each row of Y."""
    m = Y.shape[0]
    c0 = np.zeros(8)
    c1 = np.zeros(8)
    yh = np.zeros(8)
    for t in range(m):
        dn_decode_one(Y[t], c0)
        d0 = 0.0
        for i in range(8):
            d0 += (Y[t, i] - c0[i]) ** 2
        for i in range(8):
            yh[i] = Y[t, i] - 0.5
        dn_decode_one(yh, c1)
        d1 = 0.0
        for i in range(8):
            d1 += (yh[i] - c1[i]) ** 2
        if d1 < d0:
            for i in range(8):
                X[t, i] = c1[i] + 0.5
        else:
            for i in range(8):
                X[t, i] = c0[i]


@njit(cache=True)
def bw16_decode_batch(Y, reps, X):
    """Nearest BW16 point in the integer frame (min squared norm 8).

    The lattice is the union of cosets c + 2 D16 over the 32 rows of `reps`
    (a binary [16,5] first-order Reed-Muller codebook expressed in the same
    coordinate order as the generator matrix).
    """
    m = Y.shape[0]
    ncos = reps.shape[0]
    q = np.zeros(16)
    yh = np.zeros(16)
    cand = np.zeros(16)
    for t in range(m):
        bestd = 1e300
        for c in range(ncos):
            for i in range(16):
                yh[i] = (Y[t, i] - reps[c, i]) * 0.5
            dn_decode_one(yh, q)
            d = 0.0
            for i in range(16):
                cand[i] = reps[c, i] + 2.0 * q[i]
                d += (Y[t, i] - cand[i]) ** 2
            if d < bestd:
                bestd = d
                for i in range(16):
                    X[t, i] = cand[i]


@njit(cache=True)
def zn_decode_batch(Y, X):
    m, n = Y.shape
    for t in range(m):
        for i in range(n):
            X[t, i] = _round_hd(Y[t, i])
