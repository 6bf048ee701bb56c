"""Shared fixtures for the latcode test suite."""

import numpy as np
import pytest

import latcode as lc


@pytest.fixture(scope="session")
def e8_code():
    return lc.e8_code_r2()


@pytest.fixture(scope="session")
def bw16_code():
    return lc.bw16_code_r2p25()


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
