import numpy as np
import pytest

from tinyecg.dsp import FilterSpec


@pytest.fixture
def spec():
    return FilterSpec(sampling_rate_hz=360.0)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
