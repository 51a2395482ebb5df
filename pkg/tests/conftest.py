import math
import sys

import numpy as np
import pytest

from paraxial_bands import (
    CavitySpec,
    IndexPattern,
    MirrorPattern,
    PotentialModel,
    SquareLattice,
    build_gbasis,
    standard_kpath,
)

CAVITY = CavitySpec(3.5, 0.266, 0.96)
LATTICE = SquareLattice(5.0, 0.5)


def mirror_model(lnR_pixel=0.0, delta=0.0, ff=0.5, background=0.0):
    return PotentialModel(CAVITY, SquareLattice(5.0, ff), MirrorPattern(lnR_pixel, delta), background)


@pytest.fixture(scope="session")
def fig3():
    return mirror_model(0.0, 0.01j)


@pytest.fixture(scope="session")
def fig4_black():
    return mirror_model(math.log(0.999), 0.01)


@pytest.fixture(scope="session")
def empty():
    return mirror_model(0.0, 0.0)


@pytest.fixture(scope="session")
def holey():
    inv = 0.02 / 1.0 + 0.98 / 1.5
    return PotentialModel(CavitySpec(1 / inv, 1.5 * inv, 1.5), SquareLattice(2.5, 0.02), IndexPattern(1.0, 1.5))


@pytest.fixture(scope="session")
def basis():
    return build_gbasis(LATTICE, 2)


@pytest.fixture(scope="session")
def path():
    return standard_kpath(LATTICE, 20)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
