import pytest

_results = {}


def pytest_runtest_logreport(report):
    mark = getattr(report, "criterion", None)
    if mark is None:
        return
    n, title = mark
    prev = _results.get(n, (title, "PASS", 0.0))
    if report.failed or prev[1] == "FAIL":
        status = "FAIL"
    elif report.skipped:
        status = "SKIP"
    else:
        status = prev[1]
    _results[n] = (title, status, prev[2] + report.duration)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        outcome.get_result().criterion = tuple(mark.args)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        title, status, secs = _results[n]
        terminalreporter.write_line(f"criterion {n:2d} {status}  {title}  ({secs:.1f}s)")
