"""Collects acceptance outcomes and prints one line per criterion at the end."""

import pytest

_RESULTS: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call" and not report.failed:
        return
    number, title = marker.args
    entry = _RESULTS.setdefault(number, {"title": title, "ok": True, "notes": []})
    entry["ok"] = entry["ok"] and report.passed
    entry["notes"].extend(v for k, v in item.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        line = f"criterion {number:>2}: {'PASS' if entry['ok'] else 'FAIL'}  {entry['title']}"
        terminalreporter.write_line(line)
        for note in dict.fromkeys(entry["notes"]):
            terminalreporter.write_line(f"               {note}")
