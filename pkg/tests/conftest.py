import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("hglfr", deadline=None, max_examples=60)
settings.load_profile("hglfr")

from hglfr.graph import Partition, build_graph  # noqa: E402
from hglfr.sampling import GeneratorParams  # noqa: E402

TRIANGLES = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]


@pytest.fixture
def two_triangles():
    g = build_graph(6, TRIANGLES)
    return g, Partition([0, 0, 0, 1, 1, 1], g.degrees)


@pytest.fixture
def bridged_triangles():
    g = build_graph(6, TRIANGLES + [(2, 3)])
    return g, Partition([0, 0, 0, 1, 1, 1], g.degrees)


def bench_params(mode="LFR", **kw):
    base = dict(N=1000, avg_degree=14.0, k_max=50, tau1=2.5, tau2=1.5, c_min=50, c_max=200, mode=mode)
    base.update(kw)
    return GeneratorParams(**base)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def report(request):
    """Record one acceptance line; all lines are printed in the terminal summary."""

    def _report(number, name, passed, detail):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {name}: {detail}"
        request.config.stash[_ACCEPTANCE].append((number, line))
        return passed

    return _report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
