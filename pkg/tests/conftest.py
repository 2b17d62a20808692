import os

import pytest
from hypothesis import HealthCheck, settings

from aperiodica.exact import Golden
from aperiodica.scheme import make_fibonacci_scheme, make_robinson_scheme
from aperiodica.window import Interval

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

TAU_G = Golden(0, 1)


@pytest.fixture(scope="session")
def fib():
    return make_fibonacci_scheme()


@pytest.fixture(scope="session")
def fib_window():
    """[-1, tau - 1]: the interval used in most worked examples (length tau)."""
    return Interval(Golden(-1), Golden(-1, 1))


@pytest.fixture(scope="session")
def robinson():
    return make_robinson_scheme()


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
