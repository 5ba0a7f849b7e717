"""Multi-level Hermite-Pade polynomials of a Nikishin system.

The primary solver is the fixed-point iteration of the operator T~_n: every step
builds, for j = m..1, the monic orthogonal polynomial of degree eta_j for the
positive discretized measure |H_j dsigma_j / (Q_{j-1} Q_{j+1})| and then the next
weight H_{j-1} by a Cauchy integral with positive integrand.  Moment matrices are
never formed, so the cost of a large |n| is conditioning-free.

Once the zero polynomials are known, the forms are evaluated as
A_j = Q_j H_j / Q_{j+1}, which avoids the cancellation hidden in the defining
combination of a_j and nested Cauchy transforms.  The polynomials a_j (j < m) are
the polynomial parts of a_m s^_{m,j+1} (reversed system), assembled from
root-product divided differences of a_m.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.linalg import eigh_tridiagonal

from .errors import (
    DegreeCapError,
    InvalidInputError,
    NoConvergenceError,
    SignNotConstantError,
    SingularSystemError,
    ZeroCountMismatchError,
)
from .measures import Interval, NikishinSystem
from .numerics import (
    ChebSeries,
    check_off_support,
    cheb_points,
    cheb_points_first,
    cheb_roots_in_interval,
    coeffs_second_kind,
    jacobi_cauchy_integral,
    to_unit,
)

DEGREE_CAP = 24


@dataclass(frozen=True)
class MultiIndex:
    n: tuple

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        if len(n) == 0 or any(v < 0 for v in n) or sum(n) == 0:
            raise InvalidInputError(f"multi-index needs nonnegative entries, not all zero: {n}")
        object.__setattr__(self, "n", n)

    @property
    def m(self):
        return len(self.n)

    @property
    def size(self):
        return sum(self.n)

    def eta(self, j):
        """n_1 + ... + n_j, with eta(0) = 0 and eta(j) = |n| for j >= m."""
        return sum(self.n[:max(0, j)])

    def __str__(self):
        return "(" + ",".join(str(v) for v in self.n) + ")"


@dataclass(frozen=True, eq=False)
class MonicPoly:
    """Monic real polynomial stored by its (real) roots."""

    roots: np.ndarray

    def __post_init__(self):
        r = np.sort(np.asarray(self.roots, dtype=float).ravel())
        r.setflags(write=False)
        object.__setattr__(self, "roots", r)

    @property
    def degree(self):
        return self.roots.size

    def __call__(self, z):
        z = np.asarray(z)
        if self.roots.size == 0:
            return np.ones_like(z, dtype=np.result_type(z, float))
        return np.prod(z[..., None] - self.roots, axis=-1)

    def derivative(self, z):
        z = np.asarray(z, dtype=float)
        d = z[..., None] - self.roots
        tot = np.zeros(z.shape)
        for i in range(self.roots.size):
            tot += np.prod(np.delete(d, i, axis=-1), axis=-1)
        return tot

    def cheb_coeffs(self, interval):
        """Chebyshev coefficients on ``interval`` (exact interpolation at deg+1 points)."""
        x = cheb_points(self.degree + 1, interval)
        return coeffs_second_kind(self(x))

    def divided_difference(self, z, x):
        """(p(z) - p(x)) / (z - x) for every pair, by prefix/suffix root products."""
        z = np.atleast_1d(np.asarray(z))
        x = np.atleast_1d(np.asarray(x))
        r = self.roots
        d = r.size
        if d == 0:
            return np.zeros((z.size, x.size))
        zr = z[:, None] - r[None, :]
        xr = x[:, None] - r[None, :]
        pre = np.ones((z.size, d), dtype=zr.dtype)
        pre[:, 1:] = np.cumprod(zr[:, :-1], axis=1)
        suf = np.ones((x.size, d), dtype=xr.dtype)
        suf[:, :-1] = np.cumprod(xr[:, :0:-1], axis=1)[:, ::-1]
        return pre @ suf.T


def _lanczos_roots(x, w, k):
    """Zeros of the degree-k monic orthogonal polynomial of sum w_i delta(x_i), w > 0."""
    if k == 0:
        return np.empty(0)
    N = x.size
    if k >= N:
        raise SingularSystemError(f"degree {k} needs more than {N} quadrature nodes",
                                  kind="gram-singular")
    V = np.zeros((N, k + 1))
    q = np.sqrt(w)
    V[:, 0] = q / np.linalg.norm(q)
    alpha = np.zeros(k)
    beta = np.zeros(k)
    for i in range(k):
        v = x * V[:, i]
        if i > 0:
            v -= beta[i - 1] * V[:, i - 1]
        alpha[i] = V[:, i] @ v
        v -= alpha[i] * V[:, i]
        for _ in range(2):
            v -= V[:, :i + 1] @ (V[:, :i + 1].T @ v)
        beta[i] = np.linalg.norm(v)
        if beta[i] <= 1e-14 * np.max(np.abs(x)):
            raise SingularSystemError("discrete measure exhausted during orthogonalization",
                                      kind="gram-singular")
        V[:, i + 1] = v / beta[i]
    return eigh_tridiagonal(alpha, beta[:k - 1], eigvals_only=True)


def _q(Q, j, x):
    """Q_j(x) with Q_0 = Q_{m+1} = 1 (Q is the 0-based list of Q_1..Q_m)."""
    if j < 1 or j > len(Q):
        return np.ones_like(np.asarray(x, dtype=float))
    return Q[j - 1](x)


def _varying(system, Q, j, H, n_quad=None):
    """v = W H_j / (Q_{j-1} Q_{j+1}) at the nodes of rule(j)."""
    r = system.rule(j, n_quad)
    return r.weights * H / (_q(Q, j - 1, r.nodes) * _q(Q, j + 1, r.nodes))


def _next_weight(system, Qj, v, j, n_quad=None):
    """H_{j-1} at the nodes of Delta_{j-1}: sum_l Q_j(x_l)^2 v_l / (y - x_l)."""
    x = system.rule(j, n_quad).nodes
    y = system.rule(j - 1, n_quad).nodes
    return (Qj(x) ** 2 * v)[None, :] / (y[:, None] - x[None, :]) @ np.ones(x.size)


def _check_sign(v, j):
    s = np.sign(v)
    if not np.all(s == s[v.size // 2]):
        raise SignNotConstantError(f"varying measure on Delta_{j} changes sign")
    return int(s[v.size // 2])


def weight_chain(system, mi: MultiIndex, Q, n_quad=None):
    """H_j at the nodes of Delta_j, j = 1..m, and the varying densities v_j, for a
    fixed vector Q (the consistent weights of the fixed point)."""
    m = system.m
    H = [None] * (m + 1)
    v = [None] * (m + 1)
    H[m] = np.full(system.rule(m, n_quad).nodes.size, float((-1) ** m))
    for j in range(m, 0, -1):
        v[j] = _varying(system, Q, j, H[j], n_quad)
        if j > 1:
            H[j - 1] = _next_weight(system, Q[j - 1], v[j], j, n_quad)
    return H, v


def apply_Tn(system: NikishinSystem, mi: MultiIndex, Qvec):
    """One application of T~_n; returns the list Q*_1..Q*_m."""
    m = system.m
    if mi.m != m:
        raise InvalidInputError("multi-index length does not match the system")
    Q = list(Qvec)
    if len(Q) != m:
        raise InvalidInputError("need one polynomial per generator", kind="invalid-input-polynomials")
    for j in range(1, m + 1):
        if Q[j - 1].degree != mi.eta(j):
            raise InvalidInputError(f"Q_{j} must have degree {mi.eta(j)}",
                                    kind="invalid-input-polynomials")
        for k in (j - 1, j + 1):
            if 1 <= k <= m and np.any(system.intervals[k - 1].contains(Q[j - 1].roots)):
                raise InvalidInputError(f"Q_{j} has zeros on Delta_{k}",
                                        kind="invalid-input-polynomials")
    out = [None] * m
    H = np.full(system.rule(m).nodes.size, float((-1) ** m))
    for j in range(m, 0, -1):
        v = _varying(system, Q, j, H)
        _check_sign(v, j)
        x = system.rule(j).nodes
        out[j - 1] = MonicPoly(_lanczos_roots(x, np.abs(v), mi.eta(j)))
        if j > 1:
            H = _next_weight(system, out[j - 1], v, j)
    return out


def tn_distance(system, A, B, n_points=200, relative=False):
    """d_n: max over j of the sup norm of A_j - B_j on Delta_{j-1} and Delta_{j+1}."""
    m = system.m
    d = 0.0
    for j in range(1, m + 1):
        for k in (j - 1, j + 1):
            if 1 <= k <= m:
                y = cheb_points(n_points, tuple(system.intervals[k - 1]))
                diff = np.max(np.abs(A[j - 1](y) - B[j - 1](y)))
                if relative:
                    diff /= max(np.max(np.abs(B[j - 1](y))), 1e-300)
                d = max(d, float(diff))
    return d


def initial_guess(system, mi):
    return [MonicPoly(cheb_points_first(mi.eta(j), tuple(system.intervals[j - 1]))
                      if mi.eta(j) else np.empty(0)) for j in range(1, system.m + 1)]


@dataclass(frozen=True, eq=False)
class HPSolution:
    system: NikishinSystem
    multi_index: MultiIndex
    Q: tuple
    H_nodes: tuple
    v_nodes: tuple
    K: np.ndarray
    kappa: np.ndarray
    eps: np.ndarray
    tn_distances: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def m(self):
        return self.system.m

    @property
    def a_m(self):
        return self.Q[-1]

    def Qj(self, j):
        """Q_{n,j} with Q_0 = Q_{m+1} = 1."""
        if j < 1 or j > self.m:
            return MonicPoly(np.empty(0))
        return self.Q[j - 1]

    def a(self, j, z):
        """a_{n,j}(z), j = 0..m."""
        if j == self.m:
            return self.a_m(np.asarray(z, dtype=complex))
        if not 0 <= j < self.m:
            raise InvalidInputError(f"polynomial index {j} outside 0..{self.m}")
        rev = self._reversed()
        # s_{m,j+1} of the original system is s_{1,m-j} of the reversed one
        r = rev.rule(1)
        w = r.weights * rev.inner_on_nodes(1, self.m - j)
        z = np.asarray(z, dtype=complex)
        return (self.a_m.divided_difference(z.ravel(), r.nodes) @ w).reshape(z.shape)[()]

    def a_coeffs(self, j, interval=None):
        """Chebyshev coefficients of a_{n,j} on ``interval`` (default: hull of all Delta)."""
        iv = interval if interval is not None else hull(self.system)
        deg = self.multi_index.size if j == self.m else self.multi_index.size - 1
        x = cheb_points(deg + 1, tuple(iv))
        return coeffs_second_kind(np.real(self.a(j, x)))

    def _reversed(self):
        if "rev" not in self._cache:
            self._cache["rev"] = self.system.reversed()
        return self._cache["rev"]

    def H_eval(self, j, z):
        """H_{n,j}(z) for z off Delta_{j+1}; j = 0..m."""
        m = self.m
        if j == m:
            return np.full(np.shape(z), float((-1) ** m), dtype=complex)[()]
        g = self.system.generator(j + 1)
        check_off_support(z, tuple(g.interval))
        z = np.asarray(z, dtype=complex)
        r = self.system.rule(j + 1)
        dens = self.Qj(j + 1)(r.nodes) ** 2 * self.v_nodes[j + 1]
        out = np.empty(z.shape, dtype=complex)
        flat = z.ravel()
        vals = out.reshape(-1)
        for i, zz in enumerate(flat):
            if _far(zz, g.interval):
                vals[i] = np.sum(dens / (zz - r.nodes))
            else:
                vals[i] = jacobi_cauchy_integral(lambda x: self._h_integrand(j + 1, x),
                                                 tuple(g.interval), g.alpha, g.beta, zz)
        return out[()]

    def _h_integrand(self, k, x):
        """Q_k^2 H_k sigma_k-smooth / (Q_{k-1} Q_{k+1}) at arbitrary x near Delta_k."""
        g = self.system.generator(k)
        x = np.asarray(x, dtype=complex)
        return (self.Qj(k)(x) ** 2 * self.H_eval(k, x) * g.smooth_factor(x)
                / (self.Qj(k - 1)(x) * self.Qj(k + 1)(x)))


def _far(z, interval, rho_min=1.6):
    from .numerics import bernstein_rho
    return float(bernstein_rho(z, tuple(interval))) >= rho_min


def hull(system):
    return Interval(min(iv.a for iv in system.intervals), max(iv.b for iv in system.intervals))


def _constants(system, Q, v):
    m = system.m
    K = np.ones(m + 1)
    eps = np.zeros(m + 1, dtype=int)
    for j in range(m - 1, -1, -1):
        x = system.rule(j + 1).nodes
        eps[j + 1] = _check_sign(v[j + 1], j + 1)
        K[j] = np.sum(Q[j](x) ** 2 * np.abs(v[j + 1])) ** -0.5
    kappa = np.zeros(m + 1)
    kappa[1:] = K[:-1] / K[1:]
    return K, kappa, eps


def hp_solve(system: NikishinSystem, n, tol=1e-15, max_iter=80, degree_cap=DEGREE_CAP,
             method="fixed-point"):
    mi = n if isinstance(n, MultiIndex) else MultiIndex(tuple(n))
    if mi.m != system.m:
        raise InvalidInputError(f"multi-index {mi} has length {mi.m}, system has m={system.m}")
    if mi.size > degree_cap:
        raise DegreeCapError(f"|n| = {mi.size} exceeds the degree cap {degree_cap}")
    if method == "linear":
        Q, dists = _linear_Q(system, mi), ()
    elif method == "fixed-point":
        Q, dists = _fixed_point_Q(system, mi, tol, max_iter)
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    H, v = weight_chain(system, mi, Q)
    K, kappa, eps = _constants(system, Q, v)
    return HPSolution(system, mi, tuple(Q), tuple(H), tuple(v), K, kappa, eps, tuple(dists))


def _fixed_point_Q(system, mi, tol, max_iter):
    Q = initial_guess(system, mi)
    dists = []
    best = np.inf
    stall = 0
    for _ in range(max_iter):
        new = apply_Tn(system, mi, Q)
        d = tn_distance(system, new, Q, relative=True)
        dists.append(d)
        Q = new
        if d < tol:
            break
        if d < 0.5 * best:
            best, stall = d, 0
        else:
            best = min(best, d)
            stall += 1
            if stall >= 4 and best < 1e-11:
                break
    else:
        if dists[-1] > 1e-11:
            raise NoConvergenceError(f"T~_n iteration stalled at d = {dists[-1]:.2e}")
    if dists[-1] > 1e-11:
        raise NoConvergenceError(f"T~_n iteration stalled at d = {dists[-1]:.2e}")
    return Q, dists


# ----------------------------------------------------------------- linear route

def _linear_Q(system, mi):
    """Solve the |n| x |n| moment system for the non-leading coefficients of a_m.

    The conditions are the vanishing Laurent coefficients of every form, written as
    int T_nu(x) A_{j+1}(x) dsigma_{j+1}(x) = 0 with A_{j+1} assembled from a_m alone
    (a_k = polynomial part of a_m s^_{m,k+1}).  Only reliable for small |n|; it
    exists to cross-check the fixed-point solver.
    """
    m = system.m
    N = mi.size
    iv = hull(system)
    rev = system.reversed()
    basis = [npcheb.Chebyshev.basis(i, domain=[iv.a, iv.b]) for i in range(N + 1)]
    cols = []
    for p in basis:
        cols.append(_conditions(system, rev, mi, p))
    M = np.array(cols).T
    A, rhs = M[:, :N], -M[:, N]
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e15:
        raise SingularSystemError(f"moment system numerically singular (cond {cond:.1e})")
    c = np.linalg.solve(A, rhs)
    poly = npcheb.Chebyshev(np.concatenate([c, [1.0]]), domain=[iv.a, iv.b])
    am = MonicPoly(np.sort(poly.roots().real))
    # recover Q_j for j < m from the zeros of the (direct) forms
    Q = [None] * m
    Q[m - 1] = am
    for j in range(m - 1, 0, -1):
        def form(x, j=j):
            return _direct_form(system, rev, poly, j, np.asarray(x, dtype=float))
        # the direct form is tiny on Delta_j (cancellation), so its fit stops at the
        # absolute noise level rather than a relative tolerance
        iv_j = tuple(system.intervals[j - 1])
        series = _fit_form(lambda x: form(x).real, iv_j)
        h = 1e-6 * (iv_j[1] - iv_j[0])
        rts = cheb_roots_in_interval(
            series, evaluator=lambda x: form(x).real,
            derivative=lambda x: (form(x + h).real - form(x - h).real) / (2 * h),
            scale=series.abs_sum())
        if rts.size != mi.eta(j):
            raise ZeroCountMismatchError(f"linear route found {rts.size} zeros of A_{j}, "
                                         f"expected {mi.eta(j)}")
        Q[j - 1] = MonicPoly(rts)
    return Q


def _poly_part(p, rev, m, k, z):
    """Polynomial part of p s^_{m,k+1}, i.e. int (p(z) - p(x))/(z - x) ds_{m,k+1}(x)."""
    r = rev.rule(1)
    w = r.weights * rev.inner_on_nodes(1, m - k)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    x = r.nodes
    dd = (p(z)[:, None] - p(x)[None, :]) / (z[:, None] - x[None, :])
    return dd @ w


def _direct_form(system, rev, p, j, x):
    """(-1)^j a_j + sum_{k>j} (-1)^k a_k s^_{j+1,k} at x off Delta_{j+1}, a_m = p."""
    m = system.m
    x = np.atleast_1d(x)

    def a(k, pts):
        if k == m:
            return p(pts)
        return _poly_part(p, rev, m, k, pts)
    out = (-1) ** j * a(j, x)
    for k in range(j + 1, m + 1):
        out = out + (-1) ** k * a(k, x) * system.inner_eval(j + 1, k, x)
    return out


def _conditions(system, rev, mi, p):
    rows = []
    m = system.m
    for j in range(m):
        nj = mi.n[j]
        if nj == 0:
            continue
        r = system.rule(j + 1)
        x = r.nodes
        Ajp1 = _direct_form(system, rev, p, j + 1, x) if j + 1 < m else (-1) ** m * p(x)
        t = to_unit(x, tuple(system.intervals[j]))
        T = npcheb.chebvander(t, nj - 1)
        rows.extend(T.T @ (r.weights * np.real(Ajp1)))
    return np.array(rows)


# ----------------------------------------------------------------- forms

def form_eval(sol: HPSolution, j, z, method="stable"):
    """A_{n,j}(z) for z off Delta_{j+1}.

    ``stable``   Q_j H_j / Q_{j+1} (default);
    ``integral`` int A_{j+1}(x) dsigma_{j+1}(x) / (z - x) with A_{j+1} stable;
    ``direct``   the defining combination of a_k and nested transforms (cancels
                 badly at large |z| or |n|; diagnostics only).
    """
    m = sol.m
    if not 0 <= j <= m:
        raise InvalidInputError(f"form index {j} outside 0..{m}")
    z = np.asarray(z, dtype=complex)
    if j == m:
        return (-1) ** m * sol.a_m(z)
    if method == "stable":
        return sol.Qj(j)(z) * sol.H_eval(j, z) / sol.Qj(j + 1)(z)
    g = sol.system.generator(j + 1)
    check_off_support(z, tuple(g.interval))
    if method == "integral":
        f = _stable_form_fn(sol, j + 1)
        return _cauchy(f, g, z)
    if method == "direct":
        out = (-1) ** j * sol.a(j, z)
        for k in range(j + 1, m + 1):
            from .measures import shat_eval
            out = out + (-1) ** k * sol.a(k, z) * shat_eval(sol.system, j + 1, k, z)
        return out
    raise InvalidInputError(f"unknown form method {method!r}")


def _stable_form_fn(sol, k):
    """x -> A_k(x) sigma_k-smooth(x), analytic near Delta_k (k <= m)."""
    g = sol.system.generator(k)

    def f(x):
        x = np.asarray(x, dtype=complex)
        if k == sol.m:
            A = (-1) ** sol.m * sol.a_m(x)
        else:
            A = sol.Qj(k)(x) * sol.H_eval(k, x) / sol.Qj(k + 1)(x)
        return A * g.smooth_factor(x)
    return f


def _cauchy(f, g, z):
    z = np.asarray(z, dtype=complex)
    vals = [jacobi_cauchy_integral(f, tuple(g.interval), g.alpha, g.beta, complex(zz))
            for zz in z.ravel()]
    return np.array(vals, dtype=complex).reshape(z.shape)[()]


def formrec_points(system, j, count=10, rho=1.25):
    """Points on the Bernstein ellipse of Delta_{j+1} with parameter ``rho``.

    Near Delta_{j+1} the integral route loses only about rho^eta digits to
    cancellation, so the recursion identity can be tested at full precision there.
    """
    iv = system.intervals[j]
    th = (2 * np.arange(count) + 1) * np.pi / count
    w = rho * np.exp(1j * th)
    return iv.center + iv.half * 0.5 * (w + 1.0 / w)


def formrec_residual(sol: HPSolution, j, z):
    """Relative gap between A_j(z)/Q_j(z) (stable route) and
    int A_{j+1}(x) dsigma_{j+1}(x) / ((z - x) Q_j(x)) (integral route)."""
    g = sol.system.generator(j + 1)
    z = np.asarray(z, dtype=complex)
    lhs = form_eval(sol, j, z) / sol.Qj(j)(z)
    f = _stable_form_fn(sol, j + 1)
    Qj = sol.Qj(j)
    rhs = _cauchy(lambda x: f(x) / Qj(np.asarray(x, dtype=complex)), g, z)
    return np.abs(lhs - rhs) / np.maximum(np.abs(lhs), 1e-300)


def weight_H(sol: HPSolution, j, z):
    return sol.H_eval(j, z)


def normalization_constants(sol: HPSolution):
    """(K_{n,0..m}, kappa_{n,1..m}, eps_{n,1..m})."""
    return sol.K.copy(), sol.kappa[1:].copy(), sol.eps[1:].copy()


def extract_Q(sol: HPSolution, route="stable"):
    """Zeros of the forms inside each Delta_j, rebuilt into a new solution.

    j = m: colleague-matrix roots of the Chebyshev expansion of a_m on Delta_m.
    j < m: Chebyshev interpolation of A_j on Delta_j, colleague roots and Newton
    polish.  ``route`` picks the evaluation of A_j: ``stable`` (Q_j H_j / Q_{j+1}) or
    ``integral`` (int A_{j+1} dsigma_{j+1}/(z - x), independent of Q_j but losing
    roughly (|Phi_{j+1}| / cap)^{eta_{j+1}} digits on Delta_j, so small |n| only).
    """
    if route not in ("stable", "integral"):
        raise InvalidInputError(f"unknown route {route!r}")
    m = sol.m
    mi = sol.multi_index
    system = sol.system
    Q = [None] * m
    for j in range(m, 0, -1):
        iv = tuple(system.intervals[j - 1])
        if j == m:
            series = ChebSeries(iv, sol.a_m.cheb_coeffs(iv))
            rts = cheb_roots_in_interval(series, evaluator=sol.a_m,
                                         derivative=sol.a_m.derivative)
        else:
            def form(x, j=j):
                return np.real(form_eval(sol, j, np.asarray(x, dtype=float), method=route))
            series = _fit_form(form, iv)
            h = 1e-6 * (iv[1] - iv[0])
            rts = cheb_roots_in_interval(
                series, evaluator=form,
                derivative=lambda x: (form(x + h) - form(x - h)) / (2 * h),
                scale=series.abs_sum())
        if rts.size != mi.eta(j):
            raise ZeroCountMismatchError(
                f"A_{j} has {rts.size} zeros inside Delta_{j}, expected {mi.eta(j)}")
        Q[j - 1] = MonicPoly(rts)
    H, v = weight_chain(system, mi, Q)
    K, kappa, eps = _constants(system, Q, v)
    return HPSolution(system, mi, tuple(Q), tuple(H), tuple(v), K, kappa, eps, sol.tn_distances)


def _fit_form(form, iv, n=129):
    """Chebyshev interpolant of a form on its interval; grows the grid until the
    tail falls to rounding level."""
    while True:
        x = cheb_points(n, iv)
        c = coeffs_second_kind(form(x))
        tail = np.max(np.abs(c[-8:]))
        if tail <= 1e-13 * np.max(np.abs(c)) or n > 1024:
            return ChebSeries(iv, c).truncate(1e-15)
        n = 2 * n - 1


# ----------------------------------------------------------------- diagnostics

def orthogonality_residual(sol: HPSolution, j, n_quad=None, nu_max=None):
    """max over nu < eta_{j+1} of |int x^nu Q_{j+1} H_{j+1} dsigma_{j+1}/(Q_j Q_{j+2})|,
    each normalized by the matching absolute moment.  The weights are rebuilt from
    the stored Q on a quadrature twice the solver's size."""
    system = sol.system
    m = sol.m
    if not 0 <= j < m:
        raise InvalidInputError(f"orthogonality index {j} outside 0..{m - 1}")
    mi = sol.multi_index
    big = _check_quad(system, n_quad)
    _, v = weight_chain(system, mi, list(sol.Q), big)
    k = j + 1
    x = system.rule(k, big).nodes
    f = sol.Qj(k)(x) * v[k]
    top = mi.eta(k) if nu_max is None else nu_max + 1
    worst = 0.0
    for nu in range(top):
        p = x ** nu
        val = abs(np.sum(p * f))
        scale = np.sum(np.abs(p * f))
        worst = max(worst, val / scale)
    return worst


def _check_quad(system, n_quad):
    if n_quad is None:
        return 2 * max(system.n_quad)
    return int(n_quad)


def laurent_coefficients(sol: HPSolution, j, n_quad=None):
    """Laurent data of A_{n,j} at infinity.

    Returns ``(vanishing, leading)``.  ``vanishing[nu]`` for nu < n_{j+1} is
    int T_nu(x) A_{j+1}(x) dsigma_{j+1}(x) / int |T_nu A_{j+1}| dsigma_{j+1}, with T_nu
    the Chebyshev polynomial of Delta_{j+1}; these are the conditions that kill the
    first n_{j+1} coefficients.  ``leading`` is the coefficient of z^{-n_{j+1}-1},
    eps_{j+1} int Q_{j+1}^2 |v_{j+1}|, whose integrand has one sign.
    """
    system = sol.system
    mi = sol.multi_index
    k = j + 1
    big = _check_quad(system, n_quad)
    _, v = weight_chain(system, mi, list(sol.Q), big)
    iv = system.intervals[k - 1]
    x = system.rule(k, big).nodes
    qk = sol.Qj(k)(x)
    # A_{j+1} dsigma = Q_{j+1} H_{j+1} / Q_{j+2} dsigma = Q_j Q_{j+1} v
    f = sol.Qj(j)(x) * qk * v[k]
    t = np.clip(to_unit(x, tuple(iv)).real, -1.0, 1.0)
    T = np.cos(np.arange(mi.n[j])[:, None] * np.arccos(t)[None, :])
    vanishing = (T @ f) / (np.abs(T) @ np.abs(f))
    leading = float(np.sum(qk ** 2 * v[k]))
    return vanishing, leading


def polynomial_part_residual(sol: HPSolution, j, n_points=None):
    """Compare a_j (reversed-system polynomial part of a_m s^_{m,j+1}) with the forward
    recursion a_j = sum_{k>j} (-1)^{k-j+1} polypart(a_k s^_{j+1,k}); relative sup on
    Chebyshev points of the hull."""
    system = sol.system
    m = sol.m
    iv = hull(system)
    deg = sol.multi_index.size - 1
    npts = n_points or max(deg + 1, 8)
    z = cheb_points(npts, tuple(iv))
    ref = np.real(sol.a(j, z))
    fwd = np.zeros(npts)
    r = system.rule(j + 1)
    for k in range(j + 1, m + 1):
        coeffs = sol.a_coeffs(k, iv)
        w = r.weights * system.inner_on_nodes(j + 1, k)
        fwd += (-1) ** (k - j + 1) * (_cheb_divided_difference(coeffs, iv, z, r.nodes) @ w)
    return float(np.max(np.abs(fwd - ref)) / np.max(np.abs(ref)))


def _cheb_divided_difference(c, iv, s, t):
    """(p(s) - p(t)) / (s - t) for p = sum c_k T_k on ``iv``, without cancellation:
    (T_k(s) - T_k(t))/(s - t) = 2 sum_{i<k} U_{k-1-i}(s) T_i(t) - U_{k-1}(s) in unit
    variables."""
    c = np.asarray(c, dtype=float)
    d = c.size - 1
    if d <= 0:
        return np.zeros((np.size(s), np.size(t)))
    su = to_unit(np.asarray(s, dtype=float), tuple(iv))
    tu = to_unit(np.asarray(t, dtype=float), tuple(iv))
    U = np.zeros((su.size, d))
    U[:, 0] = 1.0
    if d > 1:
        U[:, 1] = 2 * su
    for r in range(2, d):
        U[:, r] = 2 * su * U[:, r - 1] - U[:, r - 2]
    T = npcheb.chebvander(tu, d - 1)
    # g_i(s) = sum_{r>=0} c_{i+1+r} U_r(s)
    G = np.zeros((su.size, d))
    for i in range(d):
        G[:, i] = U[:, :d - i] @ c[i + 1:]
    tail = U @ c[1:]
    dd = 2.0 * G @ T.T - tail[:, None]
    return dd * 2.0 / (iv.b - iv.a)
