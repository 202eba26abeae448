import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from freegrass.algebra import BaseAlgebra

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ALGEBRAS = ["c", "c2", "c3", "m2"]

seeds = st.integers(min_value=0, max_value=2**32 - 1)
algebras = st.sampled_from(ALGEBRAS).map(BaseAlgebra.parse)
levels = st.integers(min_value=1, max_value=3)


@pytest.fixture(params=ALGEBRAS)
def algebra(request):
    return BaseAlgebra.parse(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
