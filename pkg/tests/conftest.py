import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria = {}


@pytest.fixture
def criterion(request):
    """Times an acceptance criterion; the outcome is reported in the terminal summary."""
    start = time.perf_counter()
    yield
    _criteria.setdefault(request.node.nodeid, {})["elapsed"] = time.perf_counter() - start


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _criteria.setdefault(report.nodeid, {})["passed"] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, info in _criteria.items():
        if "passed" not in info:
            continue
        name = nodeid.split("::")[-1]
        status = "PASS" if info["passed"] else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  ({info.get('elapsed', float('nan')):.1f} s)")
