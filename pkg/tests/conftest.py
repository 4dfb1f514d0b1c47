import numpy as np
import pytest

from heckesieve.ingest import synthesize_form
from heckesieve.satake import SatakeData


@pytest.fixture(scope="session")
def unitary_form():
    return synthesize_form(7, 20_000, "unitary")


@pytest.fixture(scope="session")
def mixed_form():
    return synthesize_form(11, 20_000, "mixed")


@pytest.fixture(scope="session")
def trivial_form():
    """alpha = 1 at every prime: every local factor is an explicit binomial series."""
    return SatakeData.constant(1.0, 20_000)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
