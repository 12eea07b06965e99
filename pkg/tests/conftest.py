from __future__ import annotations

import sys

import pytest
from hypothesis import HealthCheck, settings

from rainbound.fisher_bounds import RainPrior
from rainbound.itu_atmos import FrequencyGrid, PathGeometry
from rainbound.scenario import LinkConfig

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def ku_grid():
    return FrequencyGrid.ku()


@pytest.fixture
def band_grid():
    return FrequencyGrid.ku(band_average=True)


@pytest.fixture
def geom():
    return PathGeometry()


@pytest.fixture
def link():
    return LinkConfig()


@pytest.fixture
def band_link():
    return LinkConfig(grid=FrequencyGrid.ku(band_average=True))


@pytest.fixture
def prior():
    return RainPrior()


def pytest_terminal_summary(terminalreporter):
    # the acceptance module keeps its PASS/FAIL lines in RESULTS
    lines = []
    for name, module in list(sys.modules.items()):
        if name.rsplit(".", 1)[-1] == "test_acceptance":
            lines = getattr(module, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
