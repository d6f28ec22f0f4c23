import sys
import numpy as np
import pytest
from hypothesis import strategies as st

from potlab.fixtures import FIXTURES, fixture
from potlab.oracles import random_instance


@pytest.fixture(params=sorted(FIXTURES))
def named(request):
    return (request.param,) + fixture(request.param)


def instances(count, seed, n_max=10):
    rng = np.random.default_rng(seed)
    return [random_instance(rng, n_max=n_max) for _ in range(count)]


seeds = st.integers(min_value=0, max_value=2**32 - 1)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
