import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mimc_accel.mimc import derive_constants, zero_constants  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def constants():
    return derive_constants()


@pytest.fixture(scope="session")
def zeros():
    return zero_constants()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
