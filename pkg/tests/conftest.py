import numpy as np
import pytest

from tonksqsl.spectral import PotentialSpec, build_grid, stationary_states


@pytest.fixture(scope="session")
def quartic_grid():
    return build_grid(6.0, 128)


@pytest.fixture(scope="session")
def quartic_pair(quartic_grid):
    """Two-particle ground orbitals at lam=1 and lam=8 on a coarse grid."""
    a = stationary_states(quartic_grid, PotentialSpec(2, 1.0), 2)
    b = stationary_states(quartic_grid, PotentialSpec(2, 8.0), 2)
    return a, b


@pytest.fixture(scope="session")
def oracle_grid():
    # coarse enough for the three-body tensor
    return build_grid(6.0, 64)


@pytest.fixture
def random_unitary():
    """Haar-like random unitary factory, ``random_unitary(n, rng)``."""
    return _random_unitary


def _random_unitary(n, rng):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


#: PASS/FAIL lines from tests/test_acceptance.py, repeated in the summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
