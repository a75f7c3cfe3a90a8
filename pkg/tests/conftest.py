import numpy as np
import pytest

ACCEPTANCE_LINES = []


def random_psd(rng, p, rank=None):
    B = rng.standard_normal((p, rank or p))
    return B @ B.T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
