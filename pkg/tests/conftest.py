import sys
import math

import pytest

from painleve2 import EquationParams, InitialAsymptotics

FIG1_INIT = InitialAsymptotics((0.9, 0.8), (math.pi / 2, math.pi / 3))


@pytest.fixture
def fig1_init():
    return FIG1_INIT


@pytest.fixture
def eps1():
    return EquationParams.two(1.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
