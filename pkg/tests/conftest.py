import math

import numpy as np
import pytest

from footinterface.geometry import INSIDE_BASE, default_geometry


@pytest.fixture(scope="session")
def geom():
    return default_geometry()


@pytest.fixture(scope="session")
def inside_geom(geom):
    return geom.with_placement(INSIDE_BASE)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_poses(rng, geom, n, pitch=True):
    """Uniform samples from the workspace box."""
    lim = geom.limits if pitch else geom.limits[:3]
    return rng.uniform(-1.0, 1.0, size=(n, lim.size)) * lim


def rotation_xy(deg):
    a = math.radians(deg)
    r = np.eye(4)
    r[0, 0] = r[1, 1] = math.cos(a)
    r[0, 1], r[1, 0] = -math.sin(a), math.sin(a)
    return r


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
