import numpy as np
import pytest

from regwave.graphs import sample_regular_graph
from regwave.spectral import eigendecompose

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_graph():
    return sample_regular_graph(60, 3, np.random.default_rng(7))


@pytest.fixture(scope="session")
def small_spectrum(small_graph):
    return eigendecompose(small_graph)
