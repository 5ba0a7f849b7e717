import json
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

from nikishin.asymptotics import (CHECKS, approximation_error, bimoment_matrix, biorthogonal_crosscheck,
                                  biorthogonal_family, biorthogonality_residuals, cauchy_kernel,
                                  convergence_sweep, default_test_points, deviation_series,
                                  eventually_decreasing, forms_asymptotic_check, kappa_ratio,
                                  ml_poly_ratio, observed_rate, predicted_rate, ray_indices,
                                  rate_of_convergence_check, theorem1_ratio)
from nikishin.config import parse_config
from nikishin.equilibrium import RaySpec
from nikishin.errors import InvalidInputError
from nikishin.hermitepade import form_eval, hp_solve

from conftest import chain

FIXTURES = Path(__file__).parent / "fixtures"


def _sq(z):
    return np.sqrt(z - 1) * np.sqrt(z + 1)


@pytest.mark.parametrize("n", [2, 5, 16])
def test_theorem1_m1_closed_form(m1, m1_eq, m1_G, n):
    sol = hp_solve(m1, (n,))
    z = 2.0
    rec = theorem1_ratio(sol, m1_eq, m1_G, 1, z)
    # 2 T_n(z) / (z + sqrt(z^2-1))^n = 1 + (z - sqrt)^(2n)
    assert abs(rec.lhs - (1 + (2 - np.sqrt(3)) ** (2 * n))) < 1e-12
    assert abs(rec.rhs - 1) < 1e-12


def test_kappa_m1(m1, m1_eq, m1_G):
    for n in (1, 6, 16):
        rec = kappa_ratio(hp_solve(m1, (n,)), m1_eq, m1_G, 1)
        assert abs(rec.lhs - 2 ** -0.5) < 1e-12 and abs(rec.rhs - 2 ** -0.5) < 1e-10
        lit = kappa_ratio(hp_solve(m1, (n,)), m1_eq, m1_G, 1, literal=True)
        assert abs(lit.rhs - rec.rhs) < 1e-14


def test_second_kind_function_m1(m1, m1_eq, m1_G):
    n = 16
    sol = hp_solve(m1, (n,))
    for z in (2.0, 1.2 + 0.5j, -0.3 + 2j):
        # A_0 = a_0 - a_1 s^ = -int Q_n(x) dsigma(x) / (z - x)
        exact = -2.0 ** (1 - n) * (z - _sq(z)) ** n / _sq(z)
        assert abs(form_eval(sol, 0, z) - exact) < 1e-12 * abs(exact)
        assert forms_asymptotic_check(sol, m1_eq, m1_G, 0, z).rel_dev < 0.05


def test_pade_error_m1(m1, m1_eq, m1_G):
    n = 16
    sol = hp_solve(m1, (n,))
    for z in (2.0, 1.2 + 0.5j):
        Tn = np.cos(n * np.arccos(complex(z)))
        exact = -(z - _sq(z)) ** n / (Tn * _sq(z))
        assert abs(approximation_error(sol, 0, z) - exact) < 1e-10 * abs(exact)
        assert rate_of_convergence_check(sol, m1_eq, m1_G, m1, 0, z).rel_dev < 0.05


def test_approximation_error_routes_agree_small_index(m2):
    sol = hp_solve(m2, (2, 2))
    z = 4.0 + 1.0j
    for j in range(2):
        a = approximation_error(sol, j, z)
        b = approximation_error(sol, j, z, method="direct")
        assert abs(a - b) < 1e-6 * abs(a)


def test_forms_rhs_branch(m1, m1_eq, m1_G):
    rec = forms_asymptotic_check(hp_solve(m1, (4,)), m1_eq, m1_G, 0, 3.0)
    assert rec.rhs.real > 0 and abs(rec.rhs.imag) < 1e-15


def test_records_real_on_real_axis(m2, m2_eq, m2_G):
    sol = hp_solve(m2, (6, 6))
    for j in range(2):
        assert abs(ml_poly_ratio(sol, m2_eq, m2_G, m2, j, 5.0).lhs.imag) < 1e-12
        assert kappa_ratio(sol, m2_eq, m2_G, j + 1).lhs.real > 0


def test_conjugate_points_give_equal_deviation(m2, m2_eq, m2_G):
    sol = hp_solve(m2, (4, 4))
    z = 2.5 + 1.5j
    for f in (lambda w: theorem1_ratio(sol, m2_eq, m2_G, 1, w),
              lambda w: forms_asymptotic_check(sol, m2_eq, m2_G, 1, w),
              lambda w: rate_of_convergence_check(sol, m2_eq, m2_G, m2, 0, w)):
        assert abs(f(z).rel_dev - f(np.conj(z)).rel_dev) < 1e-12


def test_ray_indices():
    assert ray_indices(RaySpec((0.5, 0.5)), range(4, 25, 4)) == [(2, 2), (4, 4), (6, 6), (8, 8),
                                                                  (10, 10), (12, 12)]
    assert ray_indices(RaySpec((1.0, 0.0)), [3, 7]) == [(3, 0), (7, 0)]
    with pytest.raises(InvalidInputError):
        ray_indices(RaySpec((0.5, 0.5)), [3])


def test_empty_sweep(m2):
    assert convergence_sweep(m2, RaySpec((0.5, 0.5)), []) == []


def test_default_points(m2):
    pts = default_test_points(m2)
    assert pts.size == 12
    assert all(not iv.contains(p.real) or p.imag != 0 for p in pts for iv in m2.intervals)


def test_sweep_order_and_threads(m2, m2_eq, m2_G, monkeypatch):
    ray = RaySpec((0.5, 0.5))
    serial = convergence_sweep(m2, ray, [8, 4, 6], eq=m2_eq, G=m2_G)
    monkeypatch.setenv("NIKISHIN_THREADS", "3")
    threaded = convergence_sweep(m2, ray, [8, 4, 6], eq=m2_eq, G=m2_G)
    assert serial == threaded
    ks = [r.k for r in serial]
    assert ks == sorted(ks)


def test_eventually_decreasing():
    assert eventually_decreasing([1, 2, 1.0, 0.5, 0.52, 0.3])
    assert not eventually_decreasing([1, 0.5, 0.25, 0.3, 0.1, 0.05])
    assert eventually_decreasing([1e-2, 1e-8, 1e-14, 3e-14, 2e-14])


@pytest.mark.parametrize("name", ["m2-jacobi", "m2-lebesgue", "m3-chain"])
def test_regression_fixture(name):
    ref = json.loads((FIXTURES / f"sweep_{name}.json").read_text())
    cfg = parse_config(name)
    rows = convergence_sweep(cfg.system(), cfg.ray_spec(), ref["k"])
    for key, series in ref["series"].items():
        check, j = key.split("/")
        ks, devs = deviation_series(rows, check, int(j))
        assert ks == series["k"]
        assert np.max(np.abs(np.array(devs) - series["max_rel_dev"])) < 1e-10


@pytest.mark.parametrize("name", ["m2-jacobi", "m2-lebesgue"])
def test_m2_trends(name):
    ref = json.loads((FIXTURES / f"sweep_{name}.json").read_text())
    for check in CHECKS:
        devs = np.max([s["max_rel_dev"] for k, s in ref["series"].items()
                       if k.startswith(check + "/")], axis=0)
        assert eventually_decreasing(devs) and devs[-1] < 0.05


@pytest.mark.parametrize("system", [chain(-0.5, 2), chain(0.0, 3)], ids=["m2", "m3"])
def test_observed_rate_matches_prediction(system):
    from nikishin.equilibrium import solve_vector_equilibrium
    ray = RaySpec((1 / system.m,) * system.m)
    eq = solve_vector_equilibrium(system.intervals, ray)
    z = complex(system.intervals[-1].b + 1.0, 0.5)
    ks = [system.m * i for i in range(2, 7)]
    errs = [abs(approximation_error(hp_solve(system, n), system.m - 1, z))
            for n in ray_indices(ray, ks)]
    assert abs(observed_rate(ks, errs) / predicted_rate(eq, z) - 1) < 0.15


def test_kernel_m2(m2):
    assert cauchy_kernel(m2, 0.0, 2.5) == pytest.approx(-0.4, abs=1e-15)


def test_kernel_m3_brute_force(m3):
    # sigma_2 is the uniform probability measure on [2, 3]: midpoint sums
    N = 200000
    t = 2 + (np.arange(N) + 0.5) / N
    for x1, x3 in ((0.3, 4.4), (-0.9, 4.95), (0.99, 4.01)):
        ref = np.mean(1.0 / ((t - x3) * (x1 - t)))
        assert abs(cauchy_kernel(m3, x1, x3) - ref) < 1e-6
    q = integrate.quad(lambda s: 1 / ((s - 4.4) * (0.3 - s)), 2, 3, epsabs=1e-14)[0]
    assert abs(cauchy_kernel(m3, 0.3, 4.4) - q) < 1e-13


def test_kernel_needs_two_levels(m1):
    with pytest.raises(InvalidInputError):
        cauchy_kernel(m1, 0.0, 0.5)


def test_bimoments_vs_float_quadrature(m3):
    B = bimoment_matrix(m3, 2, dps=30)
    r1, r3 = m3.rule(1), m3.rule(3)
    K = cauchy_kernel(m3, r1.nodes[:, None], r3.nodes[None, :])
    t1 = (r1.nodes - 0.0) / 1.0
    t3 = (r3.nodes - 4.5) / 0.5
    ref = r1.weights * t1 @ K @ (r3.weights * (2 * t3 ** 2 - 1))
    assert abs(float(B[1, 2]) - ref) < 1e-12 * abs(ref)


@pytest.mark.parametrize("system", [chain(-0.5, 2), chain(0.0, 3)], ids=["m2", "m3"])
def test_biorthogonal_small(system):
    fam = biorthogonal_family(system, 4)
    assert fam[0].P == (1.0,) and fam[0].Q == (1.0,)
    assert max(biorthogonality_residuals(system, 4)) < 1e-9
    for n in (1, 2, 4):
        gq, gp = biorthogonal_crosscheck(system, n, fam[n])
        assert gq < 1e-8 and gp < 1e-8
        assert fam[n].C != 0
