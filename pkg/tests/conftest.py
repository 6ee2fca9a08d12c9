import numpy as np
import pytest

from awqv.problem import MaxCutInstance


@pytest.fixture
def triangle():
    return MaxCutInstance(3, ((1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)))


@pytest.fixture
def k4():
    return MaxCutInstance(4, tuple((i, j, 1.0) for i in range(1, 5) for j in range(i + 1, 5)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_real_state(n, rng):
    psi = rng.normal(size=2**n)
    return psi / np.linalg.norm(psi)


def random_state(n, rng):
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return psi / np.linalg.norm(psi)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
