import numpy as np
import pytest
from hypothesis import settings

from pinch.amalgam import build
from pinch.toledo import calibrate

# reproducible runs; --hypothesis-profile=default explores random examples
settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")


@pytest.fixture(scope="session")
def rep():
    return build(1, 1, 6.0, "auto", 0.5)


@pytest.fixture(scope="session")
def form():
    return calibrate()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, line
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 11):
        terminalreporter.write_line(line(n))
