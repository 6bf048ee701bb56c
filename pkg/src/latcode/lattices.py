"""Lattice geometry: generators, exact nearest-point quantization, modulo,
hypercube quantization, volumes, radii and kissing sets.

All built-in lattices come with an exact closed-form/coset decoder; a generic
exact sphere decoder is available for lattices loaded from a matrix file.
Scaling conventions for the built-ins (documented, tests rely on them):

* Z^n      : unit integer grid.
* A2       : G = [[sqrt(3)/2, 0], [1/2, 1]], minimal squared norm 1.
* E8       : minimal squared norm 2 (even unimodular frame), lower-triangular
             generator derived from the standard D8-plus-glue basis.
* BW16     : minimal squared norm 4; internally an integer Construction-D
             frame (min squared norm 8, det 2^12) scaled by 1/sqrt(2).
"""

from dataclasses import dataclass, field
from math import gamma, pi

import numpy as np

from . import _kernels

_SQRT2 = np.sqrt(2.0)

# Lower-triangular E8 basis (columns generate E8), stored doubled so the
# entries are integers; diag(G) = (1/2, 1, 1, 1, 1, 1, 1, 2), det(G) = 1.
_E8_G2 = np.array(
    [
        [1, 0, 0, 0, 0, 0, 0, 0],
        [1, 2, 0, 0, 0, 0, 0, 0],
        [1, 0, 2, 0, 0, 0, 0, 0],
        [1, 0, 0, 2, 0, 0, 0, 0],
        [1, 0, 0, 0, 2, 0, 0, 0],
        [1, 0, 0, 0, 0, 2, 0, 0],
        [1, 0, 0, 0, 0, 0, 2, 0],
        [1, 2, 2, 2, 2, 2, 2, 4],
    ],
    dtype=float,
)

# BW16 integer Construction-D frame: RM(1,4) + 2 RM(3,4) + 4 Z^16.  The
# generator below uses a fixed reordering of the 4-bit monomial indices (a
# linear extension of reverse inclusion, so the matrix stays lower
# triangular).  This particular order pins down the LSB labelling used by the
# CRC search; see tests/test_pud.py for the enumeration results it yields.
_BW16_ORDER = np.array([15, 7, 13, 5, 11, 14, 3, 10, 9, 1, 12, 6, 2, 4, 8, 0])


def _bw16_integer_generator():
    K = np.array([[1]])
    F = np.array([[1, 0], [1, 1]])
    for _ in range(4):
        K = np.kron(F, K)
    wt = np.array([bin(i).count("1") for i in range(16)])
    d = np.where(wt == 0, 4, np.where(wt <= 2, 2, 1))
    B = d[:, None] * K  # rows: scaled monomial generators
    G = B.T[np.ix_(_BW16_ORDER, _BW16_ORDER)].astype(float)
    return G


def _rm14_codewords():
    """All 32 codewords of RM(1,4), coordinates in the BW16 generator order."""
    K = np.array([[1]])
    F = np.array([[1, 0], [1, 1]])
    for _ in range(4):
        K = np.kron(F, K)
    gens = [K[u] for u in range(16) if bin(u).count("1") >= 3]
    words = []
    for m in range(32):
        c = np.zeros(16, dtype=int)
        for j in range(5):
            if (m >> j) & 1:
                c ^= gens[j]
        words.append(c[_BW16_ORDER])
    return np.array(words, dtype=float)


@dataclass(frozen=True, eq=False)
class Lattice:
    """Immutable lattice description.  G columns are the basis vectors."""

    name: str
    G: np.ndarray
    decoder_kind: str  # zn | a2 | e8 | bw16 | sphere_generic
    covering_radius: float | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def N(self):
        return self.G.shape[0]

    @property
    def volume(self):
        return abs(np.linalg.det(self.G))

    def _qr(self):
        if "qr" not in self._cache:
            Q, R = np.linalg.qr(self.G)
            s = np.sign(np.diag(R))
            s[s == 0] = 1
            self._cache["qr"] = (
                np.ascontiguousarray(Q * s[None, :]),
                np.ascontiguousarray(R * s[:, None]),
            )
        return self._cache["qr"]

    def coords(self, x):
        """Basis coordinates b = G^-1 x (real)."""
        return np.linalg.solve(self.G, np.asarray(x, dtype=float))

    def contains(self, x, tol=1e-9):
        b = self.coords(x)
        return bool(np.all(np.abs(b - np.round(b)) <= tol))


def zn(n):
    return Lattice("Z%d" % n, np.eye(n), "zn", covering_radius=np.sqrt(n) / 2)


def a2():
    G = np.array([[np.sqrt(3) / 2, 0.0], [0.5, 1.0]])
    return Lattice("A2", G, "a2", covering_radius=1 / np.sqrt(3))


def e8():
    return Lattice("E8", _E8_G2 / 2.0, "e8", covering_radius=1.0)


def bw16():
    # covering radius at this scaling is not a published constant we rely on
    return Lattice("BW16", _bw16_integer_generator() / _SQRT2, "bw16")


def from_file(path, name=None):
    """Load a generator matrix (whitespace-separated rows) as a generic lattice."""
    G = np.loadtxt(path, ndmin=2)
    if G.shape[0] != G.shape[1]:
        raise ValueError("generator matrix must be square, got %dx%d" % G.shape)
    if abs(np.linalg.det(G)) <= 0:
        raise ValueError("generator matrix is singular")
    return Lattice(name or "file:%s" % path, G, "sphere_generic")


def nearest_point_batch(lat, Y):
    """Nearest lattice point for each row of Y (exact)."""
    Y = np.ascontiguousarray(np.atleast_2d(np.asarray(Y, dtype=float)))
    if Y.shape[1] != lat.N:
        raise ValueError("dimension mismatch: lattice N=%d, input %d" % (lat.N, Y.shape[1]))
    X = np.empty_like(Y)
    kind = lat.decoder_kind
    if kind == "zn":
        _kernels.zn_decode_batch(Y, X)
    elif kind == "e8":
        _kernels.e8_decode_batch(Y, X)
    elif kind == "bw16":
        if "bw16_reps" not in lat._cache:
            lat._cache["bw16_reps"] = np.ascontiguousarray(_rm14_codewords())
        _kernels.bw16_decode_batch(Y * _SQRT2, lat._cache["bw16_reps"], X)
        X /= _SQRT2
    elif kind == "a2":
        _a2_decode_batch(Y, X)
    elif kind == "sphere_generic":
        Q, R = lat._qr()
        Z = Y @ Q
        b = np.zeros(lat.N)
        for t in range(Y.shape[0]):
            _kernels.se_closest(R, np.ascontiguousarray(Z[t]), b)
            X[t] = lat.G @ b
    else:
        raise ValueError("unknown decoder kind %r" % kind)
    return X


def _a2_decode_batch(Y, X):
    # A2 = D U (D + (sqrt(3)/2, 1/2)) with D the rectangular lattice diag(sqrt(3), 1)
    off = np.array([np.sqrt(3) / 2, 0.5])
    scale = np.array([np.sqrt(3), 1.0])
    c0 = np.ceil(Y / scale - 0.5) * scale
    c1 = np.ceil((Y - off) / scale - 0.5) * scale + off
    d0 = np.sum((Y - c0) ** 2, axis=1)
    d1 = np.sum((Y - c1) ** 2, axis=1)
    pick1 = d1 < d0
    X[:] = np.where(pick1[:, None], c1, c0)


def nearest_point(lat, y):
    """Q_Lambda(y): the closest lattice point to y."""
    return nearest_point_batch(lat, np.asarray(y, dtype=float)[None, :])[0]


def mod_lattice(lat, y):
    """y mod Lambda = y - Q_Lambda(y); lands in the Voronoi region of 0."""
    y = np.asarray(y, dtype=float)
    return y - nearest_point(lat, y)


def hypercube_quantize(lat, y):
    """Quantizer to the half-open box region of a lower-triangular generator.

    Solves coordinate-by-coordinate by back substitution; the returned point
    x satisfies y_i - x_i in [-g_ii/2, g_ii/2) for every i.
    """
    G = lat.G
    if np.any(np.abs(np.triu(G, 1)) > 1e-12):
        raise ValueError("hypercube quantization needs a lower-triangular generator")
    d = np.diag(G)
    if np.any(d <= 0):
        raise ValueError("generator diagonal must be positive")
    y = np.asarray(y, dtype=float)
    n = lat.N
    b = np.zeros(n)
    acc = np.zeros(n)
    for i in range(n):
        u = (y[i] - acc[i]) / d[i]
        b[i] = np.floor(u + 0.5)
        if i + 1 < n:
            acc[i + 1 :] += G[i + 1 :, i] * b[i]
    return G @ b


def effective_radius(lat):
    """Radius of the N-sphere whose volume equals the lattice cell volume."""
    n = lat.N
    return (lat.volume * gamma(n / 2 + 1) / pi ** (n / 2)) ** (1.0 / n)


def minimal_norm2(lat):
    _, R = lat._qr()
    return float(_kernels.shortest_norm2(R))


def kissing_set(lat, max_pts=2_000_000):
    """All nonzero lattice points of minimal norm (bounded sphere enumeration)."""
    if lat.N > 16:
        raise ValueError("kissing set enumeration limited to N <= 16")
    if "kissing" in lat._cache:
        return lat._cache["kissing"]
    _, R = lat._qr()
    m2 = _kernels.shortest_norm2(R)
    cnt, b = _kernels.enumerate_within(R, m2 * (1 + 1e-9), max_pts)
    if cnt > max_pts:
        raise RuntimeError("enumeration budget exceeded")
    pts = (lat.G @ b[:cnt].T).T
    lat._cache["kissing"] = pts
    return pts


def sphere_decode(lat, y):
    """Generic exact CVP via sphere enumeration (oracle for the fast decoders)."""
    y = np.asarray(y, dtype=float)
    Q, R = lat._qr()
    b = np.zeros(lat.N)
    d2 = _kernels.se_closest(R, np.ascontiguousarray(Q.T @ y), b)
    return lat.G @ b, d2
