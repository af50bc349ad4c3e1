import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("fdel", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("fdel")


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture(scope="session")
def ar1_series():
    from fdel.models import SpectralModel, simulate_gaussian
    return simulate_gaussian(SpectralModel.ar1(0.5, 1.0), 512, 11)
