import pytest
import numpy as np

from src.core.config import Settings
from src.core.models import ModelParams, PidGains, Scenario, SmcGains


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long closed-loop or tuning runs (set SLUNG_RUN_SLOW=1)")


def pytest_collection_modifyitems(config, items):
    if Settings().RUN_SLOW:
        return
    skip_slow = pytest.mark.skip(reason="set SLUNG_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def reference_model():
    return ModelParams.reference()


@pytest.fixture
def smc_gains():
    return SmcGains()


@pytest.fixture
def stiff_pid():
    return PidGains.stiff()


@pytest.fixture
def short_hop():
    """Obstacle-free 2 m sideways hop at the coarse timestep"""
    return Scenario(
        name="short-hop",
        start_quad_position=(0.0, 0.0, -2.0),
        target_load_position=(2.0, 0.0, -1.25),
        horizon=20.0,
        control_timestep=0.01,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
