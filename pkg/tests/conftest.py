"""Pytest hooks: print one summary line per acceptance criterion."""

from __future__ import annotations

import re

_CRITERIA: dict[int, tuple[str, str]] = {}
_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if m is None:
        return
    number, slug = int(m.group(1)), m.group(2)
    if report.skipped:
        outcome = "SKIP"
    elif report.failed:
        outcome = "FAIL"
    elif report.when == "call":
        outcome = "PASS"
    else:
        return
    # a FAIL recorded in any phase must not be overwritten later
    if _CRITERIA.get(number, ("", ""))[1] != "FAIL":
        _CRITERIA[number] = (slug, outcome)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        slug, outcome = _CRITERIA[number]
        terminalreporter.write_line(
            f"criterion {number:02d} {outcome:<4} {slug.replace('_', '-')}"
        )
