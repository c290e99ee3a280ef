"""Shared fixtures and the acceptance-summary echo.

The acceptance tests register one line per criterion; the terminal
summary repeats them as a block so the pass/fail panorama is visible
without scrolling through pytest output.
"""

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def record_acceptance(number, passed, detail):
    """Called by the acceptance tests; keeps one line per criterion."""
    status = "PASS" if passed else "FAIL"
    line = f"ACCEPTANCE {number:>2}: {status}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
