import numpy as np
import pytest

from arraycal import RadioConfig
from arraycal.scenarios import make_bundle


@pytest.fixture(scope="session")
def small_config():
    return RadioConfig(carrier_freq_hz=1.272e9, subcarrier_spacing_hz=100e3,
                       num_subcarriers=16)


@pytest.fixture(scope="session")
def small_bundle():
    """Noiseless grid-array bundle, small enough for per-test use."""
    return make_bundle("grid-4x8", 24, seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
