import math

import numpy as np
import pytest

from biharmonic_control import make_params

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def p3():
    return make_params(-3.0, math.pi)


@pytest.fixture
def p5():
    return make_params(-5.0, math.pi)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
