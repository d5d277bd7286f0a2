import numpy as np
import pytest

from elastoscatter import LameParams, build_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_params():
    return LameParams(1.0, 1.0, 1.0)


@pytest.fixture
def exp2_params():
    return LameParams(1.0, 4.0, 10.0)


@pytest.fixture
def small_grid():
    return build_grid(2, 2.5, 8)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
