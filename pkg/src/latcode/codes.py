"""Nested lattice codes C = Lambda_c / Lambda_s with hypercube shaping.

The shaping lattice is G_s = L*I with a common edge L = M_i * g_ii for every
dimension, so the nesting matrix M = G_c^-1 G_s is integer and lower
triangular with diag(M) = M_i.  Rectangular encoding maps an uncoded message
b (b_i in 0..M_i-1) to x = G_c b mod Lambda_s; the indexing function inverts
it by sequential back-substitution through M.
"""

import itertools

import numpy as np

from . import lattices


class NestedLatticeCode:
    def __init__(self, lattice, moduli):
        G = lattice.G
        if np.any(np.abs(np.triu(G, 1)) > 1e-12):
            raise ValueError("coding lattice generator must be lower triangular")
        moduli = [int(m) for m in moduli]
        if len(moduli) != lattice.N or any(m < 1 for m in moduli):
            raise ValueError("need %d positive moduli" % lattice.N)
        d = np.diag(G)
        edges = np.asarray(moduli) * d
        if not np.allclose(edges, edges[0], rtol=1e-9):
            raise ValueError("hypercube shaping needs equal edges M_i * g_ii")
        self.lattice = lattice
        self.moduli = moduli
        self.N = lattice.N
        self.edge = float(edges[0])
        self.Gs = self.edge * np.eye(self.N)
        # nesting requirement: the nesting matrix must be integer
        M = np.linalg.solve(G, self.Gs)
        if np.max(np.abs(M - np.round(M))) > 1e-6:
            raise ValueError("shaping lattice is not nested in the coding lattice")
        self.M = np.round(M).astype(np.int64)
        r1 = np.log2(np.prod([float(m) for m in moduli])) / self.N
        r2 = np.log2(abs(np.linalg.det(self.Gs)) / lattice.volume) / self.N
        if abs(r1 - r2) > 1e-9:
            raise AssertionError("rate formulas disagree: %r vs %r" % (r1, r2))
        self.rate = r1
        self._power = None

    def __repr__(self):
        return "NestedLatticeCode(%s, R=%g, M_i=%s)" % (
            self.lattice.name,
            self.rate,
            self.moduli,
        )

    # -- encoding ---------------------------------------------------------

    def encode(self, b):
        b = np.asarray(b, dtype=np.int64)
        if b.shape != (self.N,):
            raise ValueError("message length mismatch")
        if np.any(b < 0) or np.any(b >= np.asarray(self.moduli)):
            raise ValueError("message component out of range")
        x = self.lattice.G @ b.astype(float)
        return x - self._shape(x)

    def encode_batch(self, B):
        B = np.asarray(B, dtype=np.int64)
        X = B.astype(float) @ self.lattice.G.T
        return X - self._shape_batch(X)

    def _shape(self, x):
        # hypercube quantizer of the diagonal shaping lattice
        return np.floor(x / self.edge + 0.5) * self.edge

    def _shape_batch(self, X):
        return np.floor(X / self.edge + 0.5) * self.edge

    def index(self, x):
        """Inverse of encode: recover the uncoded message from x in Lambda_c."""
        b = self.lattice.coords(x)
        bi = np.round(b)
        if np.max(np.abs(b - bi)) > 1e-6:
            raise ValueError("point is not in the coding lattice")
        return self.index_from_coords(bi.astype(np.int64))

    def index_from_coords(self, b):
        """Message from integer basis coordinates b (handles shaping offsets).

        b = u - M s for the shaping integer vector s; since M is lower
        triangular both are recovered top-down.
        """
        b = np.asarray(b, dtype=np.int64)
        u = np.zeros(self.N, dtype=np.int64)
        s = np.zeros(self.N, dtype=np.int64)
        for i in range(self.N):
            t = b[i] + int(self.M[i, :i] @ s[:i])
            u[i] = t % self.moduli[i]
            s[i] = (u[i] - t) // self.M[i, i]
        return u

    def index_from_coords_batch(self, B):
        B = np.asarray(B, dtype=np.int64)
        U = np.zeros_like(B)
        S = np.zeros_like(B)
        for i in range(self.N):
            t = B[:, i] + S[:, :i] @ self.M[i, :i]
            U[:, i] = np.mod(t, self.moduli[i])
            S[:, i] = (U[:, i] - t) // self.M[i, i]
        return U

    # -- power / SNR ------------------------------------------------------

    def average_power(self, mode="auto", n_samples=200_000, rng=None):
        """Per-dimension average codeword energy (Definition: E||x||^2 / N)."""
        total = 1
        for m in self.moduli:
            total *= m
        if mode == "auto":
            mode = "enumerate" if total <= 2**24 else "sample"
        if mode == "enumerate":
            if total > 2**24:
                raise ValueError("codebook too large to enumerate (%d points)" % total)
            if self._power is None:
                p = 0.0
                block = []
                for b in itertools.product(*[range(m) for m in self.moduli]):
                    block.append(b)
                    if len(block) == 8192:
                        X = self.encode_batch(np.array(block))
                        p += float(np.sum(X * X))
                        block = []
                if block:
                    X = self.encode_batch(np.array(block))
                    p += float(np.sum(X * X))
                self._power = p / (self.N * total)
            return self._power
        rng = rng or np.random.default_rng(0)
        B = np.column_stack([rng.integers(0, m, size=n_samples) for m in self.moduli])
        X = self.encode_batch(B)
        return float(np.mean(np.sum(X * X, axis=1))) / self.N

    def sigma2_for_snr(self, snr_db, power=None):
        P = self.average_power() if power is None else power
        return P / (10.0 ** (snr_db / 10.0))

    # -- decoding ---------------------------------------------------------

    def su_decode(self, y, alpha):
        """One-shot decode: x_hat = Q_{Lambda_c}(alpha*y), message via indexing."""
        xh = lattices.nearest_point(self.lattice, alpha * np.asarray(y, dtype=float))
        u = self.index(xh)
        return self.encode(u), u

    def su_decode_batch(self, Y, alpha):
        """Batch decode; the box representative is re-encoded from the integer
        message so it is bit-identical to the encoder output (a float mod-box
        of the decoded point is ambiguous when a coordinate sits exactly on
        the box boundary, which does happen for these lattices)."""
        Xh = lattices.nearest_point_batch(self.lattice, alpha * np.asarray(Y, dtype=float))
        B = np.round(np.linalg.solve(self.lattice.G, Xh.T)).T
        U = self.index_from_coords_batch(B.astype(np.int64))
        return self.encode_batch(U)


def mmse_alpha(P, sigma2):
    """MMSE receive scaling P/(P+sigma^2)."""
    if P <= 0 or sigma2 <= 0:
        raise ValueError("P and sigma2 must be positive")
    return P / (P + sigma2)


def e8_code_r2():
    """E8 nested code at rate 2 bits/dim (shaping edge 4)."""
    return NestedLatticeCode(lattices.e8(), [8, 4, 4, 4, 4, 4, 4, 2])


def bw16_code_r2p25():
    """BW16 nested code at rate 2.25 bits/dim (integer-frame shaping edge 8)."""
    lat = lattices.bw16()
    d = np.diag(lat.G)
    edge = 8 / np.sqrt(2.0)
    return NestedLatticeCode(lat, np.round(edge / d).astype(int))
