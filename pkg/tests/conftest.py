"""Collects acceptance criterion outcomes and prints one line per criterion."""

from collections import defaultdict

_outcomes: dict[int, list[bool]] = defaultdict(list)


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_runtest_logreport(report):
    for key, n in report.user_properties:
        if key == "criterion" and (report.when == "call" or report.failed or report.skipped):
            _outcomes[n].append(report.passed and not report.skipped)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if all(_outcomes[n]) else 'FAIL'}")
