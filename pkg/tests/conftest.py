import numpy as np
import pytest

from entcrit.space import CompositeSpace
from entcrit.states import superpose


@pytest.fixture(scope="session")
def boson3():
    return CompositeSpace.bosons(3, 4)


@pytest.fixture(scope="session")
def spin1():
    return CompositeSpace.spins(3, 1)


@pytest.fixture(scope="session")
def su11_half():
    return CompositeSpace.su11s(3, "1/2", 4)


def cat_110_001(space):
    """(|110> + |001>)/sqrt(2) in the level basis."""
    return superpose(space, [(1, (1, 1, 0)), (1, (0, 0, 1))])


def assert_close(actual, expected, tol):
    assert abs(actual - expected) <= tol, f"{actual!r} differs from {expected!r} by more than {tol}"


def random_hermitian(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (g + g.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# --- acceptance report --------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def record(number: int, title: str, passed: bool, detail: str = "") -> bool:
    """Log one acceptance line; returns ``passed`` so tests can assert on it."""
    line = f"[{'PASS' if passed else 'FAIL'}] AC{number:02d} {title}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
