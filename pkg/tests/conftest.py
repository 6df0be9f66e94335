from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from appell import Gamma, Gaussian, Poisson, ProductMeasure, build  # noqa: E402
from helpers import ACCEPTANCE_LINES  # noqa: E402

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def gauss1():
    return build(ProductMeasure((Gaussian(),)), N=8)


@pytest.fixture(scope="session")
def poisson1():
    return build(ProductMeasure((Poisson(1.0),)), N=8)


@pytest.fixture(scope="session")
def gamma1():
    return build(ProductMeasure((Gamma(1.0, 1.0),)), N=8)


@pytest.fixture(scope="session")
def gauss2():
    return build(ProductMeasure.iid(Gaussian(), 2), N=6)


@pytest.fixture(scope="session")
def mixed2():
    return build(ProductMeasure((Poisson(1.0), Gaussian())), N=6)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
