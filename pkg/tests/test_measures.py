import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from nikishin.errors import InvalidInputError, OnSupportError, OverlapError
from nikishin.measures import (Interval, MeasureSpec, NikishinSystem, cauchy_transform,
                               nested_moments, shat_eval, szego_integral)
from nikishin.numerics import ChebSeries


def test_szego_integral_oracles():
    # ln of the full arcsine density; the endpoint factor contributes pi ln 2
    arc = szego_integral(MeasureSpec((-1, 1), -0.5, -0.5))
    assert abs(arc - np.pi * np.log(2 / np.pi)) < 1e-12
    ref = integrate.quad(lambda t: np.log(1 / (np.pi * np.sin(t))), 0, np.pi, epsabs=1e-13)[0]
    assert abs(arc - ref) < 1e-10
    assert abs(szego_integral(MeasureSpec((-1, 1), 0, 0, mass_normalized=False))) < 1e-13
    half = MeasureSpec((-1, 1), 0.5, 0.5, mass_normalized=False)
    assert abs(szego_integral(half) + np.pi * np.log(2)) < 1e-12


def test_szego_integral_smooth_modifier():
    spec = MeasureSpec.from_function((0, 2), 0, 0, lambda x: np.exp(x), mass_normalized=False)
    # int x dx/sqrt(x(2-x)) on [0, 2] = pi
    assert abs(szego_integral(spec) - np.pi) < 1e-12


def test_cauchy_transform_basics():
    arc = MeasureSpec((-1, 1), -0.5, -0.5)
    assert abs(cauchy_transform(arc, 2.0) - 1 / np.sqrt(3)) < 1e-13
    leb = MeasureSpec((-1, 1), 0, 0)
    z = 3.0 + 1.0j
    assert abs(cauchy_transform(leb, z) - 0.5 * np.log((z + 1) / (z - 1))) < 1e-13
    spec = MeasureSpec((0.5, 2), 0.3, 1.2, ChebSeries((0.5, 2), [2.0, 0.5]), mass_normalized=False)
    assert abs(1e7 * cauchy_transform(spec, 1e7) / spec.mass - 1) < 1e-6
    assert cauchy_transform(spec, -0.5).real < 0
    with pytest.raises(OnSupportError):
        cauchy_transform(spec, 1.0)


def test_nonpositive_modifier_rejected():
    with pytest.raises(InvalidInputError):
        MeasureSpec((-1, 1), 0, 0, ChebSeries((-1, 1), [0.0, 1.0]))


def test_overlap_rejected():
    with pytest.raises(OverlapError):
        NikishinSystem([MeasureSpec((0, 2)), MeasureSpec((1, 3))])
    assert Interval(0, 1).overlaps(Interval(1, 2))


def test_shat_base_case(m2):
    z = 0.5 + 2j
    assert abs(shat_eval(m2, 1, 1, z) - cauchy_transform(m2.generator(1), z)) < 1e-12


def test_shat_nested_sign(m2):
    # sigma-hat_2 < 0 on Delta_1, so z s_{1,2}(z) tends to a negative mass
    z = 1e6
    lead = z * shat_eval(m2, 1, 2, z).real
    mass = nested_moments(m2, 1, 2, 0)[0]
    assert mass < 0 and abs(lead / mass - 1) < 1e-5


@settings(max_examples=15, deadline=None)
@given(st.floats(-4, 6), st.floats(0.05, 4))
def test_shat_conjugate_symmetry(m2, x, y):
    z = complex(x, y)
    a = shat_eval(m2, 1, 2, z)
    b = shat_eval(m2, 1, 2, np.conj(z))
    assert abs(a - np.conj(b)) <= 1e-13 * abs(a)


def test_nested_moments_simple():
    s = NikishinSystem([MeasureSpec((-1, 1), -0.5, -0.5)])
    mom = nested_moments(s, 1, 1, 4)
    assert abs(mom[0] - 1) < 1e-14 and abs(mom[2] - 0.5) < 1e-14 and abs(mom[1]) < 1e-14


def test_nested_moments_brute_force(m2_leb):
    # Lebesgue generators normalized to unit mass: density 1/2 on [-1,1] and 1 on [2,3]
    mom = nested_moments(m2_leb, 1, 2, 3)
    for nu in range(4):
        ref = integrate.dblquad(lambda t, x: 0.5 * x ** nu / (x - t), -1, 1, 2, 3,
                                epsabs=1e-13, epsrel=1e-13)[0]
        assert abs(mom[nu] - ref) < 1e-10


def test_three_level_transform_brute_force(m3):
    z = 1.5 + 0.5j

    def inner(x):
        return integrate.quad(lambda t: 1.0 / (x - t), 4, 5, epsabs=1e-14)[0]

    re = integrate.quad(lambda x: (0.5 * integrate.quad(lambda y: inner(y) / (x - y), 2, 3,
                                                        epsabs=1e-14)[0] / (z - x)).real,
                        -1, 1, epsabs=1e-12)[0]
    assert abs(shat_eval(m3, 1, 3, z).real - re) < 1e-9
