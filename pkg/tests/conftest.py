import numpy as np
import pytest

from addon_rm import bundled_scenario

_acceptance_lines: list[str] = []


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion."""

    def _report(name, ok, detail):
        _acceptance_lines.append(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")

    return _report


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def medium6():
    return bundled_scenario("medium", 6)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
