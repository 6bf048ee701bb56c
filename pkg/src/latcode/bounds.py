"""Analytic lower bound / effective-sphere estimate for retry decoding error.

The decodable region of a codeword x is widened to the cone over the sphere
S(x, r); a single 1-D Gaussian quadrature then bounds the error probability
from below.  h(z) is written both as the finite odd/even-dimension sums and
(equivalently) as a regularized upper incomplete gamma function; tests hold
the two routes together.
"""

from math import erfc, exp, gamma, sqrt

import numpy as np
from scipy import integrate, special


def h_finite_sum(N, t):
    """Chi-square tail mass as a closed-form finite sum (branches on parity of N)."""
    if N < 2:
        raise ValueError("need N >= 2")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if N % 2 == 1:
        # sum_{k=0}^{(N-3)/2} t^k/k! * e^-t
        acc = 0.0
        term = 1.0
        for k in range((N - 3) // 2 + 1):
            if k > 0:
                term *= t / k
            acc += term
        return exp(-t) * acc
    # erfc(sqrt(t)) + e^-t sum_{k=1}^{(N-2)/2} t^(k-1/2)/(k-1/2)!
    acc = 0.0
    for k in range(1, (N - 2) // 2 + 1):
        acc += t ** (k - 0.5) / gamma(k + 0.5)
    return erfc(sqrt(t)) + exp(-t) * acc


def h_gamma(N, t):
    """Same quantity via the regularized upper incomplete gamma function."""
    return float(special.gammaincc((N - 1) / 2.0, t))


def _f(z, N, P_x, r):
    denom = sqrt(N * P_x - r * r)
    return abs(r * z / denom + sqrt(N * P_x) * r / denom)


def cone_bound(N, P_x, sigma2, radius, use_finite_sum=True):
    """Lower bound on retry-decoding error probability (cone geometry).

    Requires radius^2 < N * P_x.  `radius` is the covering radius in bound
    mode, or the effective radius in estimate mode.
    """
    if N < 2:
        raise ValueError("need N >= 2")
    if radius <= 0 or sigma2 <= 0 or P_x <= 0:
        raise ValueError("P_x, sigma2 and radius must be positive")
    if radius * radius >= N * P_x:
        raise ValueError("restriction r^2 < N*P_x violated")
    sigma = sqrt(sigma2)
    h = h_finite_sum if use_finite_sum else h_gamma

    def integrand(z):
        t = _f(z, N, P_x, radius) ** 2 / (2.0 * sigma2)
        return exp(-z * z / (2.0 * sigma2)) / sqrt(2.0 * np.pi * sigma2) * (1.0 - h(N, t))

    val, err = integrate.quad(integrand, -12.0 * sigma, 12.0 * sigma, epsrel=1e-8, limit=200)
    if err > max(1e-8 * abs(val), 1e-13):
        raise RuntimeError("quadrature did not converge (err=%g)" % err)
    return max(0.0, 1.0 - val)


def effective_estimate(N, P_x, sigma2, lattice):
    """cone_bound evaluated at the effective (equal-volume sphere) radius."""
    from . import lattices

    return cone_bound(N, P_x, sigma2, lattices.effective_radius(lattice))


def cone_membership(y, x, radius):
    """Is y in the cone {u/alpha : u in S(x, radius), alpha != 0}?

    Closed form: the line through 0 and y passes within `radius` of x.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx2 = float(x @ x)
    if nx2 == 0.0:
        raise ValueError("x must be nonzero")
    ny2 = float(y @ y)
    if ny2 == 0.0:
        return nx2 <= radius * radius
    d2 = nx2 - (float(x @ y) ** 2) / ny2
    return d2 <= radius * radius + 1e-15
