"""Binary-code (CRC) embedded lattices.

A length-N binary code C_b with lower-triangular generator [T; P] is embedded
into a lattice with triangular generator G by constraining the least
significant bits of the integer coordinates:

    Lambda' = { G b : (b mod 2) in C_b },   G' = G [[T, 0], [P, 2I]].

The shipped code family is systematic CRCs (T = I); parity bits occupy the
last l coordinate positions and membership is checked by MSB-first polynomial
division of the LSB vector read in index order.
"""

from dataclasses import dataclass

import numpy as np


def lsb(b):
    """Componentwise mod-2 with nonnegative result (-3 -> 1)."""
    return np.mod(np.asarray(b, dtype=np.int64), 2)


def _gf2_rref(A):
    """Reduced row echelon form over GF(2); returns (R, pivot_cols)."""
    A = A.copy() % 2
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        hit = None
        for i in range(r, rows):
            if A[i, c]:
                hit = i
                break
        if hit is None:
            continue
        A[[r, hit]] = A[[hit, r]]
        for i in range(rows):
            if i != r and A[i, c]:
                A[i] ^= A[r]
        pivots.append(c)
        r += 1
    return A, pivots


@dataclass
class BinaryCode:
    """Linear [N, k] code with generator Gb (N x k) in lower-triangular form."""

    N: int
    k: int
    Gb: np.ndarray  # N x k over GF(2); top k x k block T lower triangular
    info_idx: tuple  # coordinate positions carrying payload LSBs

    def __post_init__(self):
        T = self.Gb[: self.k, : self.k]
        if np.any(np.triu(T, 1) % 2):
            raise ValueError("top block T must be lower triangular over GF(2)")
        if self.k and _gf2_rref(T)[1] != list(range(self.k)):
            raise ValueError("T must be nonsingular over GF(2)")
        # parity-check matrix from the nullspace of Gb^T
        R, pivots = _gf2_rref(self.Gb.T % 2) if self.k else (np.zeros((0, self.N), dtype=np.int64), [])
        free = [c for c in range(self.N) if c not in pivots]
        H = np.zeros((len(free), self.N), dtype=np.int64)
        for i, f in enumerate(free):
            H[i, f] = 1
            for r, p in enumerate(pivots):
                H[i, p] = R[r, f]
        self.H = H

    @property
    def l(self):
        return self.N - self.k

    def encode(self, m):
        m = np.asarray(m, dtype=np.int64) % 2
        if m.shape != (self.k,):
            raise ValueError("message length mismatch")
        return (self.Gb @ m) % 2

    def is_codeword(self, v):
        v = np.asarray(v, dtype=np.int64) % 2
        return not np.any((self.H @ v) % 2)


def triangularize(Gb):
    """Bring an N x k binary generator to lower-triangular [T; P] form.

    Returns (Gb_tri, perm) where perm is the row (coordinate) permutation that
    moves the k pivot positions to the front; perm[:k] is the info index set.
    """
    Gb = np.asarray(Gb, dtype=np.int64) % 2
    N, k = Gb.shape
    R, pivots = _gf2_rref(Gb.T)
    if len(pivots) != k:
        raise ValueError("generator does not have full column rank")
    # column operations over GF(2) keep the code; R^T has identity on pivot rows
    rest = [i for i in range(N) if i not in pivots]
    perm = list(pivots) + rest
    return R.T[perm], np.asarray(perm)


@dataclass
class CrcSpec:
    """CRC polynomial of degree l, bits MSB-first including both end 1s."""

    bits: tuple

    def __post_init__(self):
        self.bits = tuple(int(b) & 1 for b in self.bits)
        if len(self.bits) < 2 or self.bits[0] != 1 or self.bits[-1] != 1:
            raise ValueError("CRC polynomial needs leading and constant term 1")

    @property
    def l(self):
        return len(self.bits) - 1

    @classmethod
    def from_hex(cls, text, l=None):
        """Parse e.g. '0xB' (x^3+x+1).  The leading 1 may be implicit when l given."""
        v = int(text, 16)
        if l is None:
            l = v.bit_length() - 1
            bits = [(v >> (l - i)) & 1 for i in range(l + 1)]
        else:
            bits = [1] + [(v >> (l - 1 - i)) & 1 for i in range(l)]
        return cls(tuple(bits))

    def __str__(self):
        terms = []
        l = self.l
        for i, b in enumerate(self.bits):
            if not b:
                continue
            p = l - i
            terms.append("1" if p == 0 else ("x" if p == 1 else "x^%d" % p))
        return "+".join(terms)

    def remainder(self, v):
        """Remainder bits of the vector v (index 0 = highest degree term)."""
        r = list(np.asarray(v, dtype=np.int64) % 2)
        n = len(r)
        if n < self.l:
            raise ValueError("vector shorter than CRC degree")
        for i in range(n - self.l):
            if r[i]:
                for j, pb in enumerate(self.bits):
                    r[i + j] ^= pb
        return np.asarray(r[n - self.l :], dtype=np.int64)

    def check(self, v):
        return not np.any(self.remainder(v))

    def check_batch(self, V):
        """Vectorized zero-remainder test over the rows of V."""
        Vw = np.asarray(V, dtype=np.int64) % 2
        Vw = Vw.copy()
        n = Vw.shape[1]
        for i in range(n - self.l):
            mask = Vw[:, i] == 1
            for j, pb in enumerate(self.bits):
                if pb:
                    Vw[mask, i + j] ^= 1
        return ~np.any(Vw[:, n - self.l :], axis=1)

    def to_binary_code(self, N):
        """Systematic [N, N-l] code: codeword = (message, CRC parity)."""
        l = self.l
        if l > N:
            raise ValueError("CRC degree exceeds code length")
        k = N - l
        Gb = np.zeros((N, k), dtype=np.int64)
        for j in range(k):
            v = np.zeros(N, dtype=np.int64)
            v[j] = 1
            Gb[j, j] = 1
            Gb[k:, j] = self.remainder(v)
        return BinaryCode(N, k, Gb, tuple(range(k)))


@dataclass
class EmbeddedLattice:
    base: object  # Lattice
    code: BinaryCode
    crc: CrcSpec | None = None

    def __post_init__(self):
        if self.code.N != self.base.N:
            raise ValueError("code length must match lattice dimension")
        self.Gp = embed_generator(self.base.G, self.code)

    @property
    def l(self):
        return self.code.l

    def member_coords(self, b):
        """Is the integer coordinate vector b in Lambda' (LSB vector valid)?"""
        return self.code.is_codeword(lsb(b))

    def contains(self, x, tol=1e-9):
        b = self.base.coords(x)
        bi = np.round(b)
        if np.max(np.abs(b - bi)) > tol:
            return False
        return self.member_coords(bi.astype(np.int64))


def embed_generator(G, code):
    """G' = G [[T, 0], [P, 2I]] for the lower-triangular generator [T; P]."""
    N, k = code.N, code.k
    if G.shape != (N, N):
        raise ValueError("shape mismatch between lattice and code")
    W = np.zeros((N, N))
    W[:, :k] = code.Gb
    W[k:, k:] += 2 * np.eye(N - k)
    return G @ W


def embed_encode(bprime, emb):
    """Replace parity-position LSBs of b' so the LSB vector is a codeword.

    Positions outside the info index set must arrive with even entries (they
    carry no payload LSB)."""
    b = np.asarray(bprime, dtype=np.int64).copy()
    info = list(emb.code.info_idx)
    parity = [i for i in range(emb.code.N) if i not in info]
    if np.any(lsb(b[parity])):
        raise ValueError("payload LSB in a parity position")
    m = lsb(b[info])
    # solve T m' = m (forward substitution over GF(2)) so the codeword agrees
    # with the payload LSBs on the info positions; T = I for systematic CRCs
    T = emb.code.Gb[: emb.code.k, : emb.code.k] % 2
    mp = np.zeros_like(m)
    for i in range(emb.code.k):
        mp[i] = (m[i] ^ (T[i, :i] @ mp[:i])) % 2
    c = emb.code.encode(mp)
    b[parity] += c[parity]
    return b


def parity_check(bhat, emb):
    """1-bit pass/fail: LSB vector of the decoded message is a codeword."""
    return emb.member_coords(np.asarray(bhat, dtype=np.int64))


def check_even_nesting(code):
    """All entries of the nesting matrix even (CF error-detection condition)."""
    return bool(np.all(code.M % 2 == 0))


def snr_penalty_db(R, l, N):
    """Rate loss of embedding l parity bits: 10 log10(R / R') with R'=(NR-l)/N."""
    if l < 0 or l >= N * R:
        raise ValueError("need 0 <= l < N*R")
    return 10.0 * np.log10(N * R / (N * R - l))
