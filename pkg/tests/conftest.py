"""Per-criterion PASS/FAIL summary for the acceptance suite.

Tests carry ``@pytest.mark.criterion(n)``; a criterion passes when every
test tagged with it passed. The summary is printed at the end of the run.
"""

import pytest

_CRITERIA: dict[str, int] = {}
_OUTCOMES: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _CRITERIA[item.nodeid] = int(mark.args[0])


def pytest_runtest_logreport(report):
    n = _CRITERIA.get(report.nodeid)
    if n is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _OUTCOMES.setdefault(n, []).append((report.nodeid, report.outcome))


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        results = _OUTCOMES[n]
        failed = [nodeid for nodeid, outcome in results if outcome == "failed"]
        status = "FAIL" if failed else "PASS"
        passed = sum(outcome == "passed" for _, outcome in results)
        line = f"criterion {n}: {status} ({passed} passed, {len(failed)} failed)"
        terminalreporter.write_line(line)
        for nodeid in failed:
            terminalreporter.write_line(f"    failed: {nodeid}")
