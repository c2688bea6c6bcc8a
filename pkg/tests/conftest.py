import numpy as np
import pytest

from polymatrix import PolymatrixGame

ACCEPTANCE_LINES = []


def three_agent(p=1.0, q=1.0, r=1.0, costs=None):
    """Zero-sum game with k = (1, 1, 1) and blocks A12 = p, A13 = q, A23 = r."""
    blocks = {(0, 1): [[p]], (0, 2): [[q]], (1, 2): [[r]]}
    return PolymatrixGame((1, 1, 1), blocks, costs, "zero-sum")


def rotation(a=1.0, costs=None):
    return PolymatrixGame((1, 1), {(0, 1): [[a]]}, costs, "zero-sum")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
