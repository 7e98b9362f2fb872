import pytest

CRITERIA = {
    1: "single-copy value",
    2: "two-round closed forms",
    3: "three-round closed forms",
    4: "independent strategy is optimal under full no-signaling",
    5: "endpoints",
    6: "time-ordered and weakly time-ordered optima coincide for n = 2, 3",
    7: "four-round float values",
    8: "property suites",
    9: "vertex test",
    10: "min-entropy anchors",
}

_outcomes: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number")
    config.addinivalue_line("markers", "slow: long-running test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    k = marker.args[0]
    ok = _outcomes.setdefault(k, True)
    if rep.failed or (rep.when == "call" and rep.skipped):
        _outcomes[k] = False
    elif not ok:
        _outcomes[k] = False


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_outcomes):
        status = "PASS" if _outcomes[k] else "FAIL"
        terminalreporter.write_line(f"criterion {k:2d} [{status}] {CRITERIA.get(k, '')}")
