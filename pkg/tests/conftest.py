import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    passed, _ = _criteria.get(number, (True, title))
    if report.failed or (report.when == "call" and report.skipped):
        passed = False
    _criteria[number] = (passed, title)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        passed, title = _criteria[number]
        terminalreporter.write_line(f"AC{number:>2} {'PASS' if passed else 'FAIL'}  {title}")
