import numpy as np
import pytest

from lqconsensus.graph import build_graph, cycle_graph, derive_matrices, path_graph

REFERENCE_X0 = np.array([1.0, 2.0, -1.0, -2.0, 1.0, 3.0])


@pytest.fixture
def p2():
    return derive_matrices(path_graph(2))


@pytest.fixture
def triangle():
    return derive_matrices(cycle_graph(3))


@pytest.fixture
def cycle6():
    return derive_matrices(cycle_graph(6))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
