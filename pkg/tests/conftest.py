import pytest

_results: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, summary): acceptance criterion this test decides")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, summary = marker.args
    outcome = "PASS" if call.excinfo is None else "FAIL"
    _results[number] = (outcome, summary)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        outcome, summary = _results[number]
        terminalreporter.write_line(f"[{outcome}] criterion {number}: {summary}")
