import re

import pytest

from uwoam.modes import GridSpec

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")
_results: dict[int, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def grid256():
    return GridSpec(256, 0.048)


@pytest.fixture(scope="session")
def grid128():
    return GridSpec(128, 0.024)


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    detail = dict(report.user_properties).get("detail", "")
    if report.when == "call" or report.outcome != "passed":
        verdict = "PASS" if report.outcome == "passed" else "FAIL"
        if n not in _results or verdict == "FAIL":
            _results[n] = (verdict, detail or _results.get(n, ("", ""))[1])


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        verdict, detail = _results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}  {detail}")
