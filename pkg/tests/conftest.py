import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vfsolve import kernels
from vfsolve.problem import figure1_problem

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []
    kernels.warmup()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log(request):
    """Append a one-line PASS/FAIL record shown in the terminal summary."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def log(number, title, passed, detail):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        print(line)
        lines.append(line)
        return passed
    return log


@pytest.fixture
def fig1():
    return figure1_problem()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
