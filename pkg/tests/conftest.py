import numpy as np
import pytest

from triladder import ModelParams


@pytest.fixture
def ladder():
    """The workhorse model: gaps of 11 and 13 oscillator quanta, huge n0."""
    return ModelParams(0.0, 11.0, 24.0, 0.0, 0.0, 10**8)


@pytest.fixture
def rng():
    return np.random.default_rng(987231)


def random_params(rng, n0=100, max_coupling=1.5):
    e1 = rng.uniform(-5.0, 5.0)
    e2 = e1 + rng.uniform(0.5, 15.0)
    e3 = e2 + rng.uniform(0.5, 15.0)
    return ModelParams(e1, e2, e3, rng.uniform(0.0, max_coupling),
                       rng.uniform(0.0, max_coupling), n0)
