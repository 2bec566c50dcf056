import sys
from pathlib import Path

from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


# -- acceptance summary -----------------------------------------------------------

import pytest

_RANK = {"PASS": 0, "XFAIL": 1, "FAIL": 2}
_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and rep.passed):
        return
    if hasattr(rep, "wasxfail"):
        status = "XFAIL"
    else:
        status = "PASS" if rep.passed else "FAIL"
    n, title = marker.args
    old = _CRITERIA.get(n, ("PASS", title))[0]
    _CRITERIA[n] = (max(old, status, key=_RANK.get), title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, title = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2} {status:<5} {title}")
