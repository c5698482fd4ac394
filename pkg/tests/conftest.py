import re

_CRITERIA: dict[int, str] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.failed:
        _CRITERIA[k] = "FAIL"
    elif report.when == "call" and report.passed:
        _CRITERIA.setdefault(k, "PASS")
    elif report.skipped:
        _CRITERIA.setdefault(k, "SKIP")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {k}: {_CRITERIA[k]}")
