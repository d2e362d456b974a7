import pytest

from invmeans import Interval, make_example_pair

_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, title): acceptance criterion checked by this test")
    config.stash[_KEY] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        detail = dict(item.user_properties).get("detail", "")
        item.config.stash[_KEY].append((marker.args[0], marker.args[1], rep.passed, detail))


def pytest_terminal_summary(terminalreporter, config):
    rows = sorted(config.stash[_KEY])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in rows:
        verdict = "PASS" if passed else "FAIL"
        line = f"{verdict} criterion {number}: {title}"
        terminalreporter.write_line(f"{line} [{detail}]" if detail else line)


@pytest.fixture(scope="session")
def example():
    return make_example_pair(Interval(0.0, 10.0))

