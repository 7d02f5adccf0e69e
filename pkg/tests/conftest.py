import numpy as np
import pytest

from walkline import EdgeCoupling, kernel_from_phi

ACCEPTANCE_LINES: list = []


@pytest.fixture
def simple_walk():
    """Simple reflected +-1 walk on {0..M}."""
    def make(M=10):
        return kernel_from_phi(EdgeCoupling(np.zeros(M + 1)))
    return make


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
