import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from speedmeasure import build_speed_measure, oracle_library


@pytest.fixture(scope="session")
def nus():
    """Speed measures of the named oracles, built once per session."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = build_speed_measure(oracle_library(name))
        return cache[name]
    return get


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record a pass/fail line for an acceptance criterion, then assert it."""
    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}  [{detail}]"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
