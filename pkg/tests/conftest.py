import pytest

_results = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for name, args in getattr(report, "criterion", ()):
        _results.setdefault(args, []).append(report.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    report.criterion = [("criterion", tuple(m.args)) for m in item.iter_markers("criterion")]


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for (n, title), outcomes in sorted(_results.items()):
        status = "PASS" if all(outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {n:>2}: {status}  {title}  ({len(outcomes)} test(s))")
