import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "passed": True, "notes": []})
    if report.failed:
        entry["passed"] = False
    if report.when == "call":
        entry["notes"].extend(v for k, v in item.user_properties if k == "summary")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "PASS" if entry["passed"] else "FAIL"
        notes = "; ".join(entry["notes"])
        terminalreporter.write_line(f"criterion {number} [{status}] {entry['title']}" + (f" ({notes})" if notes else ""))
