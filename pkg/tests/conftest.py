"""Acceptance bookkeeping: tests marked ``criterion`` get a PASS/FAIL summary line."""
import pytest

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key, title): an acceptance criterion")
    config.stash[_RESULTS] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        key, title = marker.args
        item.config.stash[_RESULTS][key] = (title, report.passed, report.duration)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash[_RESULTS]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results, key=lambda k: int(k[2:])):
        title, passed, duration = results[key]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{key:<5} {verdict}  {title}  ({duration:.2f}s)")
    passed = sum(ok for _, ok, _ in results.values())
    terminalreporter.write_line(f"{passed}/{len(results)} criteria passed")
