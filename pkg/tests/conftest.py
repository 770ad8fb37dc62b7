import pytest

from egraphkit import saturation


@pytest.fixture(autouse=True)
def invariant_checks(request):
    """Run assert_invariants after every saturation iteration, except in timing tests."""
    saturation.debug_checks = request.node.get_closest_marker("timing") is None
    yield
    saturation.debug_checks = False


def pytest_configure(config):
    config.addinivalue_line("markers", "timing: wall-clock measurement, invariant checks off")
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")
    config._criteria = {}


def pytest_runtest_logreport(report):
    item_criteria = getattr(report, "criteria", None)
    if not item_criteria:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        store = report.config_criteria
        for n, title in item_criteria:
            prev = store.get(n, (title, True))
            store[n] = (title, prev[1] and report.outcome == "passed")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.criteria = [(m.args[0], m.args[1]) for m in item.iter_markers("criterion")]
    rep.config_criteria = item.config._criteria


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    criteria = config._criteria
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(criteria):
        title, ok = criteria[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {title}")
