import pytest

CRITERIA = {
    1: "Haar algebra",
    2: "fast path equals matrix path, and is faster",
    3: "wavelet block ranks bounded by tensor ranks",
    4: "MC phase behaviour",
    5: "RPCA recovery with automatic lambda",
    6: "ADMM health",
    7: "metric fixed points and oracles",
    8: "CLI determinism",
    9: "synthetic cloud removal",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_runtest_logreport(report):
    marks = getattr(report, "criterion", None)
    if marks is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes.setdefault(marks, []).append(report.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        outcome.get_result().criterion = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        if n not in _outcomes:
            continue
        status = "PASS" if all(_outcomes[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n} ({CRITERIA[n]}): {status}")
