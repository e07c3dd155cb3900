"""Shared fixtures for the test suite."""

import numpy as np
import pytest

from lorabench.phy import ChirpParams, VALID_SFS


@pytest.fixture
def p7() -> ChirpParams:
    return ChirpParams(sf=7)


@pytest.fixture(params=VALID_SFS, ids=lambda sf: f"sf{sf}")
def params_each_sf(request) -> ChirpParams:
    return ChirpParams(sf=request.param)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0xC0FFEE)


def complex_noise(rng: np.random.Generator, n: int, sigma2: float = 1.0) -> np.ndarray:
    return np.sqrt(sigma2 / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
