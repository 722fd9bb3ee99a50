import numpy as np
import pytest

from varlanczos.grid import DenseHermitianOracle
from varlanczos.state import normalize


def random_state(rng, dim):
    return normalize(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def oracle32(rng):
    return DenseHermitianOracle.random(32, rng)


# one line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
