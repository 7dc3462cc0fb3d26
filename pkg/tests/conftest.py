"""Shared test fixtures and the acceptance-summary reporter."""

import numpy as np
import pytest

# One pass/fail line per acceptance check, printed in the terminal summary
# so the outcome of the whole gate is readable at a glance.
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, name: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES.append(f"criterion {number:2d} [{status}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture
def gen():
    return np.random.default_rng(42)
