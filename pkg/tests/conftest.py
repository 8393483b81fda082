import math

import numpy as np
import pytest

from cocyclelab import ConstantCocycle, LocallyConstantCocycle, ShiftSpace, TorusMap

PHI = (1 + math.sqrt(5)) / 2
CAT = [[2, 1], [1, 1]]
B0 = np.diag([2.0, 0.5])
B1 = np.diag([0.5, 2.0])
GOLDEN_A = np.array([[1.0, 1.0], [0.0, 1.0]])
GOLDEN_B = np.array([[1.0, 0.0], [1.0, 1.0]])


@pytest.fixture
def shift2():
    return ShiftSpace.full(2)


@pytest.fixture
def cat():
    return TorusMap(CAT)


@pytest.fixture
def diag_pair():
    return LocallyConstantCocycle.from_list([B0, B1])


@pytest.fixture
def golden_gen():
    return LocallyConstantCocycle.from_list([GOLDEN_A, GOLDEN_B])


@pytest.fixture
def const2():
    return ConstantCocycle(2 * np.eye(2))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
