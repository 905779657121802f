import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hara_learning import MarketParams, Prior

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def mkt():
    return MarketParams(sigma=0.2, T=1.0, r=0.02)


@pytest.fixture
def two_point():
    return Prior.discrete([(0.1, 0.5), (0.5, 0.5)])


@pytest.fixture
def gauss():
    return Prior.gaussian(0.5, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
