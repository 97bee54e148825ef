import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(__file__))

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixture_text():
    def read(name):
        return (FIXTURES / name).read_text(encoding="utf-8")

    return read


@pytest.fixture
def square_points():
    return [[0.0, 0.0], [0.0, 2.0], [10.0, 0.0], [10.0, 2.0]]


_GATES: list[tuple[str, str, str]] = []


@pytest.fixture
def gate():
    """Record an acceptance criterion outcome, then assert it."""

    def check(name: str, ok: bool, detail: str = ""):
        _GATES.append((name, "PASS" if ok else "FAIL", detail))
        assert ok, f"{name}: {detail}"

    def skip(name: str, reason: str):
        _GATES.append((name, "SKIP", reason))
        pytest.skip(reason)

    check.skip = skip
    return check


def pytest_terminal_summary(terminalreporter):
    if not _GATES:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in _GATES:
        terminalreporter.write_line(f"{status}  {name}  {detail}")
