from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"

_acceptance_lines: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fixture_csv():
    return DATA / "synthetic_jja.csv"


@pytest.fixture
def record():
    """record(criterion, passed, detail) -> echoes one line in the terminal summary."""

    def _record(criterion: str, passed: bool, detail: str = ""):
        _acceptance_lines.append(f"{'PASS' if passed else 'FAIL'}  {criterion}  {detail}".rstrip())
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
