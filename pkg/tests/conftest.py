import numpy as np
import pytest

from nikishin.equilibrium import RaySpec, solve_vector_equilibrium
from nikishin.measures import MeasureSpec, NikishinSystem
from nikishin.szego import szego_vector


def arcsine(interval=(-1.0, 1.0)):
    return MeasureSpec(interval, -0.5, -0.5)


def chain(alpha=-0.5, m=2):
    ivs = [(-1.0, 1.0), (2.0, 3.0), (4.0, 5.0), (6.0, 7.0)][:m]
    return NikishinSystem([MeasureSpec(iv, alpha, alpha) for iv in ivs])


@pytest.fixture(scope="session")
def m1():
    return NikishinSystem([arcsine()])


@pytest.fixture(scope="session")
def m2():
    return chain(-0.5, 2)


@pytest.fixture(scope="session")
def m2_leb():
    return chain(0.0, 2)


@pytest.fixture(scope="session")
def m3():
    return chain(0.0, 3)


@pytest.fixture(scope="session")
def m2_eq(m2):
    return solve_vector_equilibrium(m2.intervals, RaySpec((0.5, 0.5)), tol=1e-13)


@pytest.fixture(scope="session")
def m2_G(m2):
    return szego_vector(m2, tol=1e-12)


@pytest.fixture(scope="session")
def m1_eq(m1):
    return solve_vector_equilibrium(m1.intervals, RaySpec((1.0,)), tol=1e-13)


@pytest.fixture(scope="session")
def m1_G(m1):
    return szego_vector(m1, tol=1e-12)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
