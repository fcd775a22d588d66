import time

import mpmath
import pytest

ACCEPTANCE_LINES = []
_SESSION_START = time.perf_counter()


@pytest.fixture(autouse=True, scope="session")
def _mp_precision():
    mpmath.mp.dps = 30
    yield


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
        elapsed = time.perf_counter() - _SESSION_START
        terminalreporter.write_line(f"full run wall time {elapsed:.1f} s (limit 900 s)")
