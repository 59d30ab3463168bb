import numpy as np
import pytest

ACCEPTANCE_LINES = []


def givens(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def random_spd(n, rng):
    M = rng.uniform(-1.0, 1.0, size=(n, n))
    return M @ M.T + 0.1 * np.eye(n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
