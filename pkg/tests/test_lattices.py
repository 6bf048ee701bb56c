"""Lattice constructions and nearest-point decoders against brute-force oracles."""

import itertools

import numpy as np
import pytest

import latcode as lc
from latcode.lattices import (
    effective_radius,
    hypercube_quantize,
    kissing_set,
    minimal_norm2,
    mod_lattice,
    nearest_point,
    nearest_point_batch,
    sphere_decode,
)


def brute_nearest(G, y, span=4):
    """Exhaustive nearest lattice point over a coefficient box (small N only)."""
    n = G.shape[1]
    best, best_d = None, np.inf
    for b in itertools.product(range(-span, span + 1), repeat=n):
        x = G @ np.array(b, dtype=float)
        d = float(np.sum((x - y) ** 2))
        if d < best_d:
            best, best_d = x, d
    return best, best_d


class TestConstants:
    def test_zn(self):
        lat = lc.zn(4)
        assert np.allclose(lat.G, np.eye(4))
        assert minimal_norm2(lat) == pytest.approx(1.0)
        assert lat.volume == pytest.approx(1.0)

    def test_a2(self):
        lat = lc.a2()
        assert minimal_norm2(lat) == pytest.approx(1.0)
        assert lat.volume == pytest.approx(np.sqrt(3) / 2)
        assert len(kissing_set(lat)) == 6

    def test_e8(self):
        lat = lc.e8()
        assert minimal_norm2(lat) == pytest.approx(2.0)
        assert lat.volume == pytest.approx(1.0)
        assert len(kissing_set(lat)) == 240
        # integral and even: all Gram entries integers, diagonal even
        gram = lat.G.T @ lat.G
        assert np.allclose(gram, np.round(gram))
        assert np.all(np.mod(np.round(np.diag(gram)), 2) == 0)

    def test_bw16(self):
        lat = lc.bw16()
        assert minimal_norm2(lat) == pytest.approx(4.0)
        assert lat.volume == pytest.approx(16.0)
        assert len(kissing_set(lat)) == 4320


class TestDecoders:
    @pytest.mark.parametrize("lat", [lc.zn(3), lc.a2()], ids=["Z3", "A2"])
    def test_zn_a2_vs_brute(self, lat, rng):
        for _ in range(60):
            y = rng.normal(0, 1.2, size=lat.N)
            x = nearest_point(lat, y)
            xb, db = brute_nearest(lat.G, y)
            assert np.sum((x - y) ** 2) == pytest.approx(db, abs=1e-9)

    def test_e8_vs_sphere(self, rng):
        lat = lc.e8()
        Y = rng.normal(0, 1.5, size=(300, 8))
        X = nearest_point_batch(lat, Y)
        for y, x in zip(Y, X):
            xs, d2 = sphere_decode(lat, y)
            assert np.sum((x - y) ** 2) == pytest.approx(d2, rel=1e-12, abs=1e-9)

    def test_bw16_vs_sphere(self, rng):
        lat = lc.bw16()
        Y = rng.normal(0, 1.5, size=(150, 16))
        X = nearest_point_batch(lat, Y)
        for y, x in zip(Y, X):
            xs, d2 = sphere_decode(lat, y)
            assert np.sum((x - y) ** 2) == pytest.approx(d2, rel=1e-12, abs=1e-9)

    def test_lattice_points_fixed(self, rng):
        # decoding an exact lattice point returns it
        for lat in (lc.a2(), lc.e8(), lc.bw16()):
            B = rng.integers(-5, 6, size=(50, lat.N)).astype(float)
            X = (lat.G @ B.T).T
            Xh = nearest_point_batch(lat, X)
            assert np.allclose(Xh, X, atol=1e-9)


class TestHelpers:
    def test_mod_lattice(self, rng):
        lat = lc.e8()
        y = rng.normal(0, 3.0, size=8)
        r = mod_lattice(lat, y)
        # remainder differs from y by a lattice point and decodes to zero
        assert lat.contains(y - r)
        assert np.allclose(nearest_point(lat, r), 0.0, atol=1e-9)

    def test_hypercube_quantize(self):
        lat = lc.zn(2)
        y = np.array([3.7, -1.2])
        q = hypercube_quantize(lat, y)
        assert np.allclose(q, [4.0, -1.0])

    def test_effective_radius(self):
        # V_2 r^2 = vol -> r = sqrt(vol/pi) in 2-D
        lat = lc.a2()
        assert effective_radius(lat) == pytest.approx(np.sqrt(lat.volume / np.pi))

    def test_coords_roundtrip(self, rng):
        lat = lc.bw16()
        b = rng.integers(-9, 10, size=16).astype(float)
        x = lat.G @ b
        assert np.allclose(lat.coords(x), b, atol=1e-9)
