"""Per-criterion PASS/FAIL summary for tests marked ``criterion``."""
from __future__ import annotations

import pytest

_outcomes: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    report = (yield).get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when == "teardown" and report.passed:
        return
    n, title = mark.args
    _, results = _outcomes.setdefault(n, (title, []))
    if report.when == "call" or not report.passed:
        results.append("PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        title, results = _outcomes[n]
        verdict = "PASS" if results and all(r == "PASS" for r in results) else "FAIL"
        terminalreporter.write_line(f"{verdict} criterion {n}: {title}")
