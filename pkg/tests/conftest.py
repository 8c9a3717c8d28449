"""Shared pytest configuration: slow statistical checks run only with --runslow."""

import numpy as np
import pytest

from dppi.contracts.models import MovementParams
from dppi.contracts.settings import settings


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow statistical tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True, scope="session")
def quiet_progress():
    """Progress bars off for the whole session."""
    previous = settings.progress
    settings.progress = False
    yield
    settings.progress = previous


@pytest.fixture(scope="session")
def guppy():
    return MovementParams(beta=0.15, gamma1=-1.2, gamma2=1.5, sigma2=1.7, sigma_e2=0.4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
