import pytest

_RESULTS: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or report.when not in ("setup", "call"):
        return
    number, title = mark.args
    prev = _RESULTS.get(number, (title, True))
    ok = prev[1] and not report.failed
    if report.when == "setup" and report.skipped:
        ok = False
    _RESULTS[number] = (title, ok)
    if report.when == "call" or report.failed:
        line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}: {title}"
        print("\n" + line)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, ok = _RESULTS[number]
        terminalreporter.write_line(f"{number:>2} {'PASS' if ok else 'FAIL'}  {title}")
