import numpy as np
import pytest

from gibbs_tv.counting import CounterConfig
from gibbs_tv.estimators import EstimatorBudget
from gibbs_tv.sampling import SamplerConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def exact_budget():
    """Budget whose sampler and counter are both served by enumeration."""
    return EstimatorBudget(
        sampler=SamplerConfig(exact_fallback_cap=20),
        counter=CounterConfig(exact_fallback_cap=20),
    )
