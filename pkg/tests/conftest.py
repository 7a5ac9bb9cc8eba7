import numpy as np
import pytest
from _util import random_tets

from qfvm.scheme import preset

SCHEMES = ("qfvs1", "qfvs2", "qfvs3", "qfvs4")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=SCHEMES)
def scheme(request):
    return preset(request.param)


@pytest.fixture
def tets(rng):
    return random_tets(rng, 100)


# ---------------------------------------------------------------- acceptance summary

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    n = mark.args[0]
    _CRITERIA[n] = _CRITERIA.get(n, True) and not rep.failed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if _CRITERIA[n] else 'FAIL'}")
