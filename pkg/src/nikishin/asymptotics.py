"""Strong-asymptotics checks for multi-level Hermite-Pade data.

Every check returns a ConvergenceRecord.  The left side comes from an HPSolution
only; the right side from the equilibrium solution, the Szego vector and a
private copy of the Nikishin system, so the two pipelines share no caches.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .equilibrium import EquilibriumSolution, RaySpec, log_phi
from .errors import InvalidInputError, SingularSystemError
from .hermitepade import HPSolution, MultiIndex, form_eval, hp_solve, hull
from .measures import MeasureSpec, NikishinSystem, _nodes_needed, shat_eval
from .numerics import check_off_support, interval_sqrt, mp_gauss_jacobi_rule
from .szego import SzegoVector

# bimoment systems lose roughly |log10 C_n| digits; C_8 is ~1e-35 on the m=3 demo
BIO_DPS = 60

CHECKS = ("theorem1", "kappa", "ml_poly", "forms", "rate")


@dataclass(frozen=True)
class ConvergenceRecord:
    check: str
    multi_index: tuple
    j: int
    z: complex
    lhs: complex
    rhs: complex
    abs_dev: float
    rel_dev: float
    k: int = 0

    @classmethod
    def build(cls, check, sol, j, z, lhs, rhs, k=0):
        lhs, rhs = complex(lhs), complex(rhs)
        d = abs(lhs - rhs)
        return cls(check, sol.multi_index.n, int(j), complex(z), lhs, rhs, d,
                   d / abs(rhs) if rhs != 0 else float("inf"), k)


def _rhs_system(system: NikishinSystem):
    """Fresh system over the same generators: no shared transform caches."""
    fresh = NikishinSystem(system.generators)
    assert fresh._inner is not system._inner
    return fresh


def _reduced(sol: HPSolution, eq: EquilibriumSolution, j, z):
    """Q_{n,j}(z) / Phi_j(z)^{eta_{n,j}}, one root at a time (Q_0 = Phi_0 = 1)."""
    if j == 0 or j > sol.m:
        return complex(1.0)
    roots = sol.Qj(j).roots
    if roots.size == 0:
        return complex(1.0)
    ph = np.exp(complex(log_phi(eq, j, z)))
    return complex(np.prod((z - roots) / ph))


def _gratio(G: SzegoVector, j, z):
    return complex(G[j](z)) / G[j].at_infinity


def _check_ray(eq: EquilibriumSolution, sol: HPSolution):
    if eq.m != sol.m:
        raise InvalidInputError("equilibrium and HP data differ in m", kind="geometry-mismatch")


def theorem1_ratio(sol: HPSolution, eq: EquilibriumSolution, G: SzegoVector, j, z):
    """Q_{n,j}(z) / Phi_j^{eta_{n,j}}(z) against G_j(z) / G_j(inf)."""
    _check_ray(eq, sol)
    z = complex(z)
    check_off_support(z, tuple(sol.system.intervals[j - 1]))
    return ConvergenceRecord.build("theorem1", sol, j, z, _reduced(sol, eq, j, z), _gratio(G, j, z))


def kappa_ratio(sol: HPSolution, eq: EquilibriumSolution, G: SzegoVector, j, literal=False):
    """kappa_{n,j} / C_j^{eta_{n,j}} against G(mu_j, inf) / sqrt(2 pi).

    mu_j = sigma_j h~_j / (f_{j-1} f_{j+1}) with f_k = G_k / G_k(inf), so
    G(mu_j, inf) = G_j(inf) / sqrt(G_{j-1}(inf) G_{j+1}(inf)).  ``literal`` drops the
    square-root factor, which only agrees when m = 1.
    """
    _check_ray(eq, sol)
    eta = sol.multi_index.eta(j)
    lhs = sol.kappa[j] * np.exp(-eta * eq.robin_constants[j - 1])
    rhs = G[j].at_infinity / np.sqrt(2 * np.pi)
    if not literal:
        rhs /= np.sqrt(G[j - 1].at_infinity * G[j + 1].at_infinity)
    return ConvergenceRecord.build("kappa", sol, j, complex(np.inf), lhs, rhs)


def ml_poly_ratio(sol: HPSolution, eq: EquilibriumSolution, G: SzegoVector, system, j, z):
    """a_{n,j}(z) / Phi_m^{|n|}(z) against (G_m(z)/G_m(inf)) s^_{m,j+1}(z)."""
    _check_ray(eq, sol)
    m = sol.m
    z = complex(z)
    check_off_support(z, tuple(sol.system.intervals[m - 1]))
    lhs = complex(sol.a(j, z)) / complex(sol.a_m(np.asarray(z))) * _reduced(sol, eq, m, z)
    rev = _rhs_system(system).reversed()
    rhs = _gratio(G, m, z) * complex(shat_eval(rev, 1, m - j, z))
    return ConvergenceRecord.build("ml_poly", sol, j, z, lhs, rhs)


def _edge_sqrt(system, k, z):
    return complex(interval_sqrt(z, tuple(system.intervals[k - 1])))


def forms_asymptotic_check(sol: HPSolution, eq: EquilibriumSolution, G: SzegoVector, j, z):
    """eps_{j+1} K_j^2 Phi_{j+1}^{eta_{j+1}} A_{n,j} / Phi_j^{eta_j} against
    (G_j(z)/G_j(inf)) (G_{j+1}(inf)/G_{j+1}(z)) / sqrt((z-a_{j+1})(z-b_{j+1}))."""
    _check_ray(eq, sol)
    z = complex(z)
    for k in (j, j + 1):
        if 1 <= k <= sol.m:
            check_off_support(z, tuple(sol.system.intervals[k - 1]))
    # Q_j H_j / Q_{j+1} rescaled factor by factor, so no huge powers appear
    A_over = complex(sol.H_eval(j, z)) * _reduced(sol, eq, j, z) / _reduced(sol, eq, j + 1, z)
    lhs = sol.eps[j + 1] * sol.K[j] ** 2 * A_over
    rhs = (_gratio(G, j, z) / _gratio(G, j + 1, z)) / _edge_sqrt(sol.system, j + 1, z)
    return ConvergenceRecord.build("forms", sol, j, z, lhs, rhs)


def _shat_rev(rev, m, k, j, z):
    """s^_{k,j} = <sigma_k, ..., sigma_j> for k >= j via the reversed system; 1 if k < j."""
    if k < j:
        return complex(1.0)
    return complex(shat_eval(rev, m + 1 - k, m + 1 - j, z))


def approximation_error(sol: HPSolution, j, z, method="stable"):
    """(a_{n,j}/a_{n,m} - s^_{m,j+1})(z).

    ``stable`` uses (-1)^j [A_j + sum_{k=j+1}^{m-1} (-1)^{k-j} s^_{k,j+1} A_k] / Q_m with
    the forms in product form; ``direct`` subtracts the two sides and loses about
    log10|Phi_m^{2|n|}| digits.
    """
    m = sol.m
    z = complex(z)
    rev = sol._reversed()
    if method == "direct":
        return (complex(sol.a(j, z)) / complex(sol.a_m(np.asarray(z)))
                - _shat_rev(rev, m, m, j + 1, z))
    if method != "stable":
        raise InvalidInputError(f"unknown method {method!r}")
    tot = complex(form_eval(sol, j, z))
    for k in range(j + 1, m):
        tot += (-1) ** (k - j) * _shat_rev(rev, m, k, j + 1, z) * complex(form_eval(sol, k, z))
    return (-1) ** j * tot / complex(sol.a_m(np.asarray(z)))


def rate_of_convergence_check(sol: HPSolution, eq: EquilibriumSolution, G: SzegoVector,
                              system, j, z, method="stable"):
    """Scaled approximation error of a_{n,j}/a_{n,m} against its limit.

    lhs = eps_m K_{m-1}^2 Phi_m^{2|n|} / Phi_{m-1}^{eta_{m-1}} (a_j/a_m - s^_{m,j+1}),
    rhs = G_{m-1}(z) G_m(inf)^2 / (G_m(z)^2 G_{m-1}(inf)) (-1)^{m-1} s^_{m-1,j+1}(z)
          / sqrt((z-a_m)(z-b_m)), with s^_{m-1,m} = 1.
    """
    _check_ray(eq, sol)
    m = sol.m
    z = complex(z)
    for i in range(j + 1, m + 1):
        check_off_support(z, tuple(sol.system.intervals[i - 1]))
    err = approximation_error(sol, j, z, method)
    n = sol.multi_index.size
    lp_m = complex(log_phi(eq, m, z))
    lp_prev = complex(log_phi(eq, m - 1, z)) if m > 1 else 0.0
    scale = np.exp(2 * n * lp_m - sol.multi_index.eta(m - 1) * lp_prev)
    lhs = sol.eps[m] * sol.K[m - 1] ** 2 * scale * err
    rev = _rhs_system(system).reversed()
    rhs = (_gratio(G, m - 1, z) / _gratio(G, m, z) ** 2 * (-1) ** (m - 1)
           * _shat_rev(rev, m, m - 1, j + 1, z) / _edge_sqrt(system, m, z))
    return ConvergenceRecord.build("rate", sol, j, z, lhs, rhs)


# ----------------------------------------------------------------- biorthogonal

def cauchy_kernel(system: NikishinSystem, x1, xm):
    """K(x1, xm) = int ... int prod 1/(x_i - x_{i+1}) dsigma_2 ... dsigma_{m-1}.

    For m = 2 this is 1/(x1 - x2).  Accepts arrays (broadcast together).
    """
    m = system.m
    if m < 2:
        raise InvalidInputError("the kernel needs m >= 2", kind="index-out-of-range")
    x1 = np.asarray(x1, dtype=float)
    xm = np.asarray(xm, dtype=float)
    if m == 2:
        return 1.0 / (x1 - xm)
    x1b, xmb = np.broadcast_arrays(x1, xm)
    # f(t) on Delta_{m-1} nodes, pulled inward one interval at a time
    r = system.rule(m - 1)
    f = 1.0 / (r.nodes - xmb[..., None])
    for i in range(m - 2, 1, -1):
        ri = system.rule(i)
        f = (f * r.weights) @ (1.0 / (ri.nodes[:, None] - r.nodes[None, :])).T
        r = ri
    out = np.sum(f * r.weights / (x1b[..., None] - r.nodes), axis=-1)
    return out[()]


def _mp_rule(spec: MeasureSpec, n, dps):
    x, w = mp_gauss_jacobi_rule(tuple(spec.interval), spec.alpha, spec.beta, n, dps)
    with mpmath.workdps(dps):
        a, b = spec.interval
        c = [mpmath.mpf(float(v)) for v in spec.modifier.coeffs]
        scale = mpmath.mpf(spec.scale)
        out = []
        for xi, wi in zip(x, w):
            t = (2 * xi - a - b) / (b - a)
            # Clenshaw for the Chebyshev modifier at extended precision
            b1 = b2 = mpmath.mpf(0)
            for ck in reversed(c[1:]):
                b1, b2 = 2 * t * b1 - b2 + ck, b1
            out.append(wi * scale * (t * b1 - b2 + c[0]))
    return list(x), out


def _mp_cheb(t, n):
    vals = [mpmath.mpf(1), t]
    for _ in range(2, n + 1):
        vals.append(2 * t * vals[-1] - vals[-2])
    return vals[:n + 1]


def _default_nodes(system, n, dps):
    ivs = system.intervals
    m = len(ivs)
    return max(_nodes_needed(ivs[i], ivs[i + 1 if i + 1 < m else i - 1], 0.8 * dps)
               for i in range(m)) + n


def bimoment_matrix(system: NikishinSystem, n, dps=BIO_DPS, n_nodes=None):
    """B[i, l] = int int T_i(x1) K(x1, xm) T_l(xm) dsigma_1 dsigma_m (mp matrix).

    T_i, T_l are the Chebyshev polynomials of Delta_1 and Delta_m; monomials would
    cost about log10(cond) extra digits for nothing.
    """
    m = system.m
    if m < 2:
        raise InvalidInputError("biorthogonality needs m >= 2", kind="index-out-of-range")
    ivs = system.intervals
    n_nodes = n_nodes or _default_nodes(system, n, dps)
    rules = [_mp_rule(system.generator(i), n_nodes, dps) for i in range(1, m + 1)]
    with mpmath.workdps(dps):
        xm, wm = rules[-1]
        # g(s, q) = K(s, xm_q) for s on the current interval, built from Delta_{m-1} inward
        xs = rules[m - 2][0]
        g = [[1 / (s - xm[q]) for q in range(n_nodes)] for s in xs]
        for i in range(m - 3, -1, -1):
            xt, wt = rules[i + 1]
            xs = rules[i][0]
            g = [[mpmath.fsum(wt[p] * g[p][q] / (s - xt[p]) for p in range(n_nodes))
                  for q in range(n_nodes)] for s in xs]
        f = [[g[p][q] * wm[q] for q in range(n_nodes)] for p in range(n_nodes)]
        x1, w1 = rules[0]
        a1, b1 = ivs[0]
        am, bm = ivs[-1]
        V1 = [_mp_cheb((2 * s - a1 - b1) / (b1 - a1), n) for s in x1]
        Vm = [_mp_cheb((2 * t - am - bm) / (bm - am), n) for t in xm]
        # F[p][l] = sum_q f[p][q] T_l(xm_q)
        F = [[mpmath.fsum(f[p][q] * Vm[q][l] for q in range(n_nodes)) for l in range(n + 1)]
             for p in range(n_nodes)]
        B = mpmath.matrix(n + 1, n + 1)
        for i in range(n + 1):
            for l in range(n + 1):
                B[i, l] = mpmath.fsum(w1[p] * V1[p][i] * F[p][l] for p in range(n_nodes))
    return B


@dataclass(frozen=True)
class BiorthogonalPair:
    """Monic P_n (on Delta_1) and Q_n (on Delta_m) as Chebyshev coefficients of their
    own intervals, with C_n = <P_n, Q_n>_K."""

    n: int
    P: tuple
    Q: tuple
    C: float
    intervals: tuple
    P_mp: tuple = field(default=(), repr=False, compare=False)
    Q_mp: tuple = field(default=(), repr=False, compare=False)

    def P_poly(self):
        return np.polynomial.Chebyshev(np.array(self.P, dtype=float), domain=list(self.intervals[0]))

    def Q_poly(self):
        return np.polynomial.Chebyshev(np.array(self.Q, dtype=float), domain=list(self.intervals[1]))


def _monic_solve(A, n, dps):
    """Coefficients c (Chebyshev) of the degree-n poly killed by the first n rows of A,
    scaled to be monic on an interval of half-length h (caller rescales)."""
    with mpmath.workdps(dps):
        if n == 0:
            return [mpmath.mpf(1)]
        M = mpmath.matrix(n, n)
        rhs = mpmath.matrix(n, 1)
        for i in range(n):
            for l in range(n):
                M[i, l] = A[i, l]
            rhs[i] = -A[i, n]
        try:
            c = mpmath.lu_solve(M, rhs)
        except ZeroDivisionError as exc:
            raise SingularSystemError("bimoment matrix singular", kind="bimoment-singular") from exc
        return [c[i] for i in range(n)] + [mpmath.mpf(1)]


def _make_monic(c, iv, dps):
    """Rescale Chebyshev coefficients on ``iv`` so the x^n coefficient is 1."""
    n = len(c) - 1
    with mpmath.workdps(dps):
        if n == 0:
            return [mpmath.mpf(1)]
        h = mpmath.mpf(iv.b - iv.a) / 2
        lead = c[-1] * mpmath.mpf(2) ** (n - 1) / h ** n
        return [ci / lead for ci in c]


def _pair_from(B, n, ivs, dps):
    with mpmath.workdps(dps):
        q = _make_monic(_monic_solve(B, n, dps), ivs[-1], dps)
        p = _make_monic(_monic_solve(B.T, n, dps), ivs[0], dps)
        C = mpmath.fsum(p[i] * B[i, l] * q[l] for i in range(n + 1) for l in range(n + 1))
        if C == 0:
            raise SingularSystemError("C_n vanishes", kind="bimoment-singular")
        return BiorthogonalPair(n, tuple(float(v) for v in p), tuple(float(v) for v in q),
                                float(C), (ivs[0], ivs[-1]), tuple(p), tuple(q))


def biorthogonal_polys(system: NikishinSystem, n, dps=BIO_DPS, n_nodes=None):
    """Cauchy biorthogonal P_n, Q_n from the bordered bimoment systems (mpmath)."""
    return biorthogonal_family(system, n, dps, n_nodes)[-1]


def biorthogonal_family(system: NikishinSystem, nmax, dps=BIO_DPS, n_nodes=None):
    """Pairs for n = 0..nmax from the leading blocks of one bimoment matrix."""
    nmax = int(nmax)
    if nmax < 0:
        raise InvalidInputError("degree must be nonnegative")
    B = bimoment_matrix(system, nmax, dps, n_nodes)
    ivs = system.intervals
    out = []
    with mpmath.workdps(dps):
        for n in range(nmax + 1):
            Bn = mpmath.matrix(n + 1, n + 1)
            for i in range(n + 1):
                for l in range(n + 1):
                    Bn[i, l] = B[i, l]
            out.append(_pair_from(Bn, n, ivs, dps))
    return out


def biorthogonality_residuals(system: NikishinSystem, nmax, dps=BIO_DPS, n_nodes=None):
    """max_{k<n} |<P_k, Q_n>_K| / |C_n| and the same with P, Q swapped, for n = 1..nmax.

    The pairs come from one rule; the pairings are evaluated on a rule 16 nodes larger.
    """
    n_nodes = n_nodes or _default_nodes(system, nmax, dps)
    pairs = biorthogonal_family(system, nmax, dps, n_nodes)
    B = bimoment_matrix(system, nmax, dps, n_nodes + 16)
    out = []
    with mpmath.workdps(dps):
        def pair_val(P, Q):
            return mpmath.fsum(P[i] * B[i, l] * Q[l] for i in range(len(P)) for l in range(len(Q)))
        for n in range(1, nmax + 1):
            Cn = abs(pair_val(pairs[n].P_mp, pairs[n].Q_mp))
            worst = max(max(abs(pair_val(pairs[k].P_mp, pairs[n].Q_mp)),
                            abs(pair_val(pairs[n].P_mp, pairs[k].Q_mp))) for k in range(n))
            out.append(float(worst / Cn))
    return out


def biorthogonal_crosscheck(system: NikishinSystem, n, pair=None, **hp_kw):
    """Relative Chebyshev-coefficient gaps between (P_n, Q_n) and the ML polynomials
    a_{n,m} of the multi-index (n, 0, ..., 0) for the system and its reverse."""
    pair = pair or biorthogonal_polys(system, n)
    idx = (n,) + (0,) * (system.m - 1)
    out = []
    for sys_, coeffs, iv in ((system, pair.Q, system.intervals[-1]),
                             (system.reversed(), pair.P, system.intervals[0])):
        sol = hp_solve(sys_, idx, **hp_kw)
        ref = sol.a_m.cheb_coeffs(tuple(iv))
        c = np.array(coeffs)
        out.append(float(np.max(np.abs(ref - c)) / np.max(np.abs(ref))))
    return tuple(out)


# ----------------------------------------------------------------- sweeps

def default_test_points(system: NikishinSystem, count=10):
    """``count`` points on a circle of radius twice the outer radius of the geometry
    (about the hull centre), plus two real points in each gap."""
    iv = hull(system)
    c, R = iv.center, 2.0 * iv.half
    th = (2 * np.arange(count) + 1) * np.pi / count
    pts = list(c + R * np.exp(1j * th))
    ivs = system.intervals
    for lo, hi in zip(ivs[:-1], ivs[1:]):
        a, b = (lo.b, hi.a) if lo.b < hi.a else (hi.b, lo.a)
        pts += [complex(a + (b - a) / 3), complex(a + 2 * (b - a) / 3)]
    return np.array(pts, dtype=complex)


def ray_indices(ray: RaySpec, k_list):
    out = []
    for k in k_list:
        n = [k * p for p in ray.p]
        r = [int(round(v)) for v in n]
        if any(abs(v - ri) > 1e-9 for v, ri in zip(n, r)):
            raise InvalidInputError(f"k={k} times ray {ray.p} is not integral",
                                    kind="nonrealizable-ray")
        out.append(tuple(r))
    return out


def _applicable(system, check, j, z):
    """Whether z satisfies the precondition of ``check`` for index j."""
    m = system.m
    ivs = system.intervals
    if check in ("theorem1",):
        need = [j]
    elif check == "ml_poly":
        need = [m]
    elif check == "forms":
        need = [k for k in (j, j + 1) if 1 <= k <= m]
    elif check == "rate":
        need = list(range(j + 1, m + 1))
    else:
        return True
    return not any(ivs[k - 1].contains(z.real) and abs(z.imag) == 0.0 for k in need)


def records_for(sol, eq, G, system, points, checks=CHECKS, k=0):
    m = sol.m
    rows = []
    for check in checks:
        if check == "kappa":
            rows += [kappa_ratio(sol, eq, G, j) for j in range(1, m + 1)]
            continue
        js = range(1, m + 1) if check == "theorem1" else range(m)
        for j in js:
            for z in points:
                if not _applicable(system, check, j, z):
                    continue
                if check == "theorem1":
                    rows.append(theorem1_ratio(sol, eq, G, j, z))
                elif check == "ml_poly":
                    rows.append(ml_poly_ratio(sol, eq, G, system, j, z))
                elif check == "forms":
                    rows.append(forms_asymptotic_check(sol, eq, G, j, z))
                elif check == "rate":
                    rows.append(rate_of_convergence_check(sol, eq, G, system, j, z))
                else:
                    raise InvalidInputError(f"unknown check {check!r}")
    return [ConvergenceRecord(**{**r.__dict__, "k": k}) for r in rows]


def _threads():
    try:
        return max(1, int(os.environ.get("NIKISHIN_THREADS", "1")))
    except ValueError:
        return 1


def convergence_sweep(system: NikishinSystem, ray: RaySpec, k_list, test_points=None,
                      eq=None, G=None, checks=CHECKS, hp_kw=None, tol_eq=1e-13,
                      tol_fp=1e-12):
    """All ratio checks for n = k p over ``k_list``; rows sorted by (k, check, j, point)."""
    from .equilibrium import solve_vector_equilibrium
    from .szego import szego_vector

    k_list = list(k_list)
    indices = ray_indices(ray, k_list)
    if not indices:
        return []
    points = default_test_points(system) if test_points is None else np.asarray(test_points, complex)
    eq = eq or solve_vector_equilibrium(system.intervals, ray, tol=tol_eq)
    G = G or szego_vector(system, tol=tol_fp)
    hp_kw = hp_kw or {}

    def one(args):
        k, n = args
        sol = hp_solve(system, n, **hp_kw)
        return records_for(sol, eq, G, system, points, checks, k)

    jobs = list(zip(k_list, indices))
    nthreads = _threads()
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            chunks = list(ex.map(one, jobs))
    else:
        chunks = [one(a) for a in jobs]
    order = {c: i for i, c in enumerate(CHECKS)}
    rows = [r for ch in chunks for r in ch]
    pidx = {complex(z): i for i, z in enumerate(points)}
    rows.sort(key=lambda r: (r.k, order[r.check], r.j, pidx.get(r.z, -1)))
    return rows


def eventually_decreasing(devs, wobble=0.1, floor=1e-12):
    """True if, after the first third, each value is at most (1 + wobble) times the one
    before it.  Values under ``floor`` count as converged (round-off noise)."""
    d = list(devs)
    start = len(d) // 3
    return all(d[i + 1] <= max((1 + wobble) * d[i], floor) for i in range(start, len(d) - 1))


def predicted_rate(eq: EquilibriumSolution, z):
    """|Phi_{m-1}(z)^{P_{m-1}} / (C_m Phi_m(z))^2|: per-unit-k decay of the approximation
    error along n = k p (P the cumulative ray sums, Phi_0 = 1).  The C_m factor comes from
    K_{m-1} = kappa_m ~ C_m^{|n|}."""
    m = eq.m
    lp = 2 * (log_phi(eq, m, complex(z)).real + eq.robin_constants[m - 1])
    if m > 1:
        lp -= eq.ray.P[m - 2] * log_phi(eq, m - 1, complex(z)).real
    return float(np.exp(-lp))


def observed_rate(ks, errs):
    """exp of the least-squares slope of ln|err| against k."""
    slope = np.polyfit(np.asarray(ks, float), np.log(np.abs(np.asarray(errs))), 1)[0]
    return float(np.exp(slope))


def deviation_series(rows, check, j=None, agg=max):
    """Per-k aggregate of rel_dev for one check (optionally one j), ordered by k."""
    sel = [r for r in rows if r.check == check and (j is None or r.j == j)]
    ks = sorted({r.k for r in sel})
    return ks, [agg([r.rel_dev for r in sel if r.k == k]) for k in ks]
