import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from degenpara._compat import HAVE_NUMBA

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

BACKEND_NAMES = ["numpy"] + (["numba"] if HAVE_NUMBA else [])


@pytest.fixture(params=BACKEND_NAMES)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
