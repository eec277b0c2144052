import numpy as np
import pytest

from ctcsim.checks import scenario_run
from ctcsim.model import default_rrr_model

ACCEPTANCE_LINES = []


@pytest.fixture
def model():
    return default_rrr_model()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def matched_run():
    """Default scenario, exact controller model, starting on the reference."""
    return scenario_run()


@pytest.fixture(scope="session")
def report():
    def record(criterion: str, passed: bool, detail: str):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
