"""Collects one pass/fail line per acceptance criterion and prints them at the end."""

import pytest

_RESULTS: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        status = "PASS" if report.passed else "FAIL"
        note = "; ".join(v for k, v in item.user_properties if k == "note")
        _RESULTS[number] = (status, title, note)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        status, title, note = _RESULTS[number]
        line = f"{status}  criterion {number:>2}: {title}"
        if note:
            line += f"  [{note}]"
        terminalreporter.write_line(line)
