"""Quadrature rules, Chebyshev series and Cauchy-type integrals on real intervals.

An interval is any pair ``(a, b)`` with ``a < b``.  Jacobi weights are written
``(b - x)**alpha * (x - a)**beta``, which is the usual ``(1 - t)**alpha (1 + t)**beta``
after the affine map onto [-1, 1].
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import mpmath
import numpy as np
import scipy.fft
from numpy.polynomial import chebyshev as npcheb
from scipy.special import beta as beta_fn
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .errors import InvalidInputError, NoConvergenceError, OnSupportError

# Scalar seam: every dense computation runs in SCALAR; the handful of solves that
# outgrow it (bimoment systems) go through mpmath at MP_DPS digits instead.
SCALAR = np.float64
MP_DPS = 40
MAX_NODES = 1024
_EPS = float(np.finfo(SCALAR).eps)


def endpoints(interval):
    a, b = (float(v) for v in interval)
    if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
        raise InvalidInputError(f"degenerate interval [{a}, {b}]", kind="degenerate-interval")
    return a, b


def to_unit(x, interval):
    a, b = endpoints(interval)
    return (2.0 * np.asarray(x) - (a + b)) / (b - a)


def from_unit(t, interval):
    a, b = endpoints(interval)
    return 0.5 * (a + b) + 0.5 * (b - a) * np.asarray(t)


def joukowski_inverse(zeta):
    """Inverse of t -> (t + 1/t)/2 onto the exterior of the unit disk.

    Principal square roots give |phi| > 1 off [-1, 1]; on the interval itself the
    value is the boundary value from the upper half plane when Im zeta = +0.
    """
    zeta = np.asarray(zeta, dtype=complex)
    return zeta + np.sqrt(zeta - 1.0) * np.sqrt(zeta + 1.0)


def interval_sqrt(z, interval):
    """sqrt((z - b)(z - a)), holomorphic off [a, b] and positive for z > b."""
    a, b = endpoints(interval)
    zeta = to_unit(np.asarray(z, dtype=complex), (a, b))
    return 0.5 * (b - a) * np.sqrt(zeta - 1.0) * np.sqrt(zeta + 1.0)


def bernstein_rho(z, interval):
    """Parameter of the Bernstein ellipse of ``interval`` passing through z."""
    return np.abs(joukowski_inverse(to_unit(np.asarray(z, dtype=complex), interval)))


def on_interval(z, interval, atol=0.0):
    a, b = endpoints(interval)
    z = np.asarray(z, dtype=complex)
    return (np.abs(z.imag) <= atol) & (z.real >= a - atol) & (z.real <= b + atol)


def check_off_support(z, interval, what="point"):
    if np.any(on_interval(z, interval)):
        a, b = endpoints(interval)
        raise OnSupportError(f"{what} lies on the support [{a}, {b}]")


# --------------------------------------------------------------------------- grids

def cheb_points(n, interval=(-1.0, 1.0)):
    """Chebyshev points of the second kind (extrema, endpoints included), ascending."""
    if n < 1:
        raise InvalidInputError("need at least one point", kind="size-mismatch")
    if n == 1:
        return from_unit(np.zeros(1), interval)
    t = -np.cos(np.pi * np.arange(n) / (n - 1))
    t = 0.5 * (t - t[::-1])  # exact antisymmetry about the midpoint
    return from_unit(t, interval)


def cheb_points_first(n, interval=(-1.0, 1.0)):
    """Chebyshev points of the first kind (Gauss-Chebyshev nodes), ascending."""
    if n < 1:
        raise InvalidInputError("need at least one point", kind="size-mismatch")
    t = -np.cos(np.pi * (np.arange(n) + 0.5) / n)
    t = 0.5 * (t - t[::-1])
    return from_unit(t, interval)


def coeffs_second_kind(values):
    """Chebyshev coefficients of the interpolant through ascending second-kind samples."""
    v = np.asarray(values)[::-1]
    n = v.shape[0]
    if n == 1:
        return v.astype(float).copy()
    c = scipy.fft.dct(v, type=1, axis=0) / (n - 1)
    c[0] /= 2.0
    c[-1] /= 2.0
    return c


def coeffs_first_kind(values):
    """Chebyshev coefficients of the interpolant through ascending first-kind samples."""
    v = np.asarray(values)[::-1]
    n = v.shape[0]
    c = scipy.fft.dct(v, type=2, axis=0) / n
    c[0] /= 2.0
    return c


# --------------------------------------------------------------------------- series

@dataclass(frozen=True, eq=False)
class ChebSeries:
    """Finite Chebyshev expansion sum c_k T_k(t) with t the unit variable of ``interval``."""

    interval: tuple
    coeffs: np.ndarray
    interp_error: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "interval", endpoints(self.interval))
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float)).copy()
        if c.ndim != 1 or c.size == 0:
            raise InvalidInputError("coefficients must be a non-empty vector", kind="size-mismatch")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __call__(self, x):
        x = np.asarray(x)
        return npcheb.chebval(to_unit(x, self.interval), self.coeffs)

    @property
    def degree(self):
        return self.coeffs.size - 1

    def derivative(self):
        a, b = self.interval
        if self.degree == 0:
            return ChebSeries(self.interval, [0.0])
        return ChebSeries(self.interval, npcheb.chebder(self.coeffs) * 2.0 / (b - a))

    def truncate(self, rel=1e-14):
        c = self.coeffs
        big = np.max(np.abs(c))
        keep = c.size
        while keep > 1 and abs(c[keep - 1]) <= rel * big:
            keep -= 1
        return ChebSeries(self.interval, c[:keep], self.interp_error)

    def scaled(self, factor):
        return ChebSeries(self.interval, factor * self.coeffs, abs(factor) * self.interp_error)

    def abs_sum(self):
        return float(np.sum(np.abs(self.coeffs)))

    @classmethod
    def constant(cls, value, interval):
        return cls(interval, [float(value)])

    @classmethod
    def fit(cls, func, interval, tol=1e-14, n_min=17, n_max=MAX_NODES + 1):
        """Adaptive interpolant: double the second-kind grid until the tail is below tol."""
        n = n_min
        while True:
            x = cheb_points(n, interval)
            vals = np.asarray(func(x), dtype=float)
            c = coeffs_second_kind(vals)
            scale = max(np.max(np.abs(c)), 1e-300)
            tail = np.max(np.abs(c[-max(2, n // 8):]))
            if tail <= tol * scale:
                series = cls(interval, c).truncate(tol)
                err = float(np.max(np.abs(series(x) - vals)))
                return cls(interval, series.coeffs, err)
            if n >= n_max:
                raise NoConvergenceError(f"Chebyshev fit did not resolve below {tol} with {n} points")
            n = 2 * n - 1


def cheb_interpolate(samples, interval=(-1.0, 1.0), n_points=None):
    """Interpolant through samples taken at ascending second-kind Chebyshev points."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size == 0:
        raise InvalidInputError("samples must be a non-empty vector", kind="size-mismatch")
    if n_points is not None and samples.size != n_points:
        raise InvalidInputError(
            f"got {samples.size} samples for a {n_points}-point grid", kind="size-mismatch")
    series = ChebSeries(interval, coeffs_second_kind(samples))
    x = cheb_points(samples.size, interval)
    err = float(np.max(np.abs(series(x) - samples)))
    return ChebSeries(series.interval, series.coeffs, err).truncate()


def cheb_roots_in_interval(series, evaluator=None, derivative=None, scale=None, imag_tol=1e-7):
    """Real roots strictly inside the series' interval, sorted and Newton-polished.

    Candidates come from the colleague matrix of the series; each is polished on
    ``evaluator`` (defaults to the series itself) until the residual is below
    1e-12*scale or the step stalls at rounding level.
    """
    series = series.truncate()
    if not np.any(series.coeffs):
        raise InvalidInputError("zero series has no isolated roots")
    if series.degree == 0:
        return np.empty(0)
    f = evaluator if evaluator is not None else series
    df = derivative if derivative is not None else series.derivative()
    if scale is None:
        scale = series.abs_sum()
    a, b = series.interval
    cand = npcheb.chebroots(series.coeffs)
    cand = cand[(np.abs(cand.imag) <= imag_tol) & (np.abs(cand.real) <= 1.0 + 1e-8)].real
    roots = []
    for x in from_unit(np.clip(cand, -1.0, 1.0), series.interval):
        x = float(x)
        for _ in range(50):
            fx = float(np.real(np.ravel(f(x))[0]))
            if abs(fx) < 1e-12 * scale:
                break
            dfx = float(np.real(np.ravel(df(x))[0]))
            if dfx == 0.0:
                break
            step = fx / dfx
            x -= step
            if abs(step) <= 4e-16 * max(1.0, abs(x)):
                break
        else:
            raise NoConvergenceError(f"Newton polishing stalled near x={x}")
        if a < x < b:
            roots.append(x)
    roots = np.sort(np.array(roots))
    if roots.size > 1:
        keep = np.concatenate([[True], np.diff(roots) > 1e-12 * (b - a)])
        roots = roots[keep]
    return roots


# --------------------------------------------------------------------------- quadrature

@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple

    def __len__(self):
        return self.nodes.size

    def integrate(self, values):
        return np.asarray(values) @ self.weights if np.ndim(values) == 1 else self.weights @ values

    def with_density(self, density_values):
        return QuadratureRule(self.nodes, self.weights * np.asarray(density_values), self.interval)


def jacobi_recurrence(n, alpha, beta):
    """Monic three-term recurrence (diagonal, off-diagonal) for (1-t)^alpha (1+t)^beta."""
    k = np.arange(n, dtype=float)
    s = 2.0 * k + alpha + beta
    diag = np.empty(n)
    with np.errstate(invalid="ignore", divide="ignore"):
        diag[:] = (beta ** 2 - alpha ** 2) / (s * (s + 2.0))
    if s[0] == 0.0:
        diag[0] = (beta - alpha) / (alpha + beta + 2.0)
    kk = k[1:]
    ss = s[1:]
    off = np.empty(max(n - 1, 0))
    if n > 1:
        # first entry in cancelled form so that alpha + beta = -1 stays finite
        off[0] = 4.0 * (1 + alpha) * (1 + beta) / ((2 + alpha + beta) ** 2 * (3 + alpha + beta))
        off[1:] = (4.0 * kk[1:] * (kk[1:] + alpha) * (kk[1:] + beta) * (kk[1:] + alpha + beta)
                   / (ss[1:] ** 2 * (ss[1:] + 1.0) * (ss[1:] - 1.0)))
    return diag, np.sqrt(off)


@functools.lru_cache(maxsize=256)
def _gauss_jacobi_cached(a, b, alpha, beta, n):
    # Golub-Welsch, eigenvectors taken in blocks to bound memory.  scipy's
    # roots_jacobi drifts by 1e-13..1e-9 for unequal exponents, too coarse for the
    # nested transforms built on these rules.
    diag, off = jacobi_recurrence(n, alpha, beta)
    log_mu0 = ((alpha + beta + 1.0) * np.log(2.0) + gammaln(alpha + 1.0) + gammaln(beta + 1.0)
               - gammaln(alpha + beta + 2.0))
    if n == 1:
        t, w = diag.copy(), np.array([1.0])
    else:
        ts, ws = [], []
        for lo in range(0, n, 256):
            hi = min(n, lo + 256) - 1
            tb, vb = eigh_tridiagonal(diag, off, select="i", select_range=(lo, hi))
            ts.append(tb)
            ws.append(vb[0] ** 2)
        t, w = np.concatenate(ts), np.concatenate(ws)
    h = 0.5 * (b - a)
    x = a + h * (t + 1.0)
    w = np.exp(log_mu0) * w * h ** (alpha + beta + 1.0)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_jacobi_rule(interval, alpha, beta, n_nodes):
    """Gauss rule for the weight (b-x)^alpha (x-a)^beta on [a, b]."""
    a, b = endpoints(interval)
    alpha, beta = float(alpha), float(beta)
    if not (alpha > -1.0 and beta > -1.0):
        raise InvalidInputError(f"Jacobi exponents must exceed -1, got ({alpha}, {beta})",
                                kind="invalid-exponent")
    n_nodes = int(n_nodes)
    if n_nodes < 1:
        raise InvalidInputError("n_nodes must be positive")
    x, w = _gauss_jacobi_cached(a, b, alpha, beta, n_nodes)
    return QuadratureRule(x, w, (a, b))


@functools.lru_cache(maxsize=64)
def mp_gauss_jacobi_rule(interval, alpha, beta, n_nodes, dps=MP_DPS):
    """Extended-precision Gauss-Jacobi nodes/weights (lists of mpf) on [a, b]."""
    a, b = endpoints(interval)
    with mpmath.workdps(dps):
        t, w = mpmath.mp.gauss_quadrature(int(n_nodes), "jacobi", alpha, beta)
        a_, b_ = mpmath.mpf(a), mpmath.mpf(b)
        h = (b_ - a_) / 2
        x = [a_ + h * (ti + 1) for ti in t]
        w = [wi * h ** (mpmath.mpf(alpha) + mpmath.mpf(beta) + 1) for wi in w]
    return tuple(x), tuple(w)


def cauchy_integral(rule, density_values, z):
    """sum_i w_i rho(x_i) / (z - x_i); the caller sizes the rule for dist(z, interval)."""
    z = np.asarray(z, dtype=complex)
    check_off_support(z, rule.interval)
    wr = rule.weights * np.asarray(density_values)
    out = (wr / (z[..., None] - rule.nodes)).sum(axis=-1)
    return out[()] if out.ndim == 0 else out


def jacobi_cauchy(interval, alpha, beta, z):
    """Closed form of int_a^b (b-x)^alpha (x-a)^beta / (z - x) dx for z off [a, b]."""
    a, b = endpoints(interval)
    check_off_support(z, (a, b))
    h = 0.5 * (b - a)
    zeta = complex(to_unit(complex(z), (a, b)))
    arg = 2.0 / (1.0 - zeta)
    f = complex(mpmath.hyp2f1(1, alpha + 1.0, alpha + beta + 2.0, arg))
    J = 2.0 ** (alpha + beta + 1.0) / (zeta - 1.0) * beta_fn(alpha + 1.0, beta + 1.0) * f
    return h ** (alpha + beta) * J


def jacobi_cauchy_integral(func, interval, alpha, beta, z, rtol=1e-12, n0=32):
    """int (b-x)^alpha (x-a)^beta func(x) / (z - x) dx for one complex z off [a, b].

    ``func`` must be analytic near the interval and accept complex arrays.  Far from
    the interval the Gauss rule is doubled until two passes agree; when z sits so
    close that MAX_NODES would not resolve the pole, func(z) is subtracted and the
    singular part is taken from the closed form ``jacobi_cauchy``.
    """
    a, b = endpoints(interval)
    z = complex(z)
    check_off_support(z, (a, b))
    near = 2 * MAX_NODES * np.log(bernstein_rho(z, (a, b))) < 40.0
    if near:
        fz = complex(func(np.array([z]))[0])
        singular = fz * jacobi_cauchy((a, b), alpha, beta, z)
    n, prev = n0, None
    while n <= MAX_NODES:
        r = gauss_jacobi_rule((a, b), alpha, beta, n)
        fx = np.asarray(func(r.nodes), dtype=complex)
        if near:
            terms = r.weights * (fx - fz) / (z - r.nodes)
            val = singular + terms.sum()
        else:
            terms = r.weights * fx / (z - r.nodes)
            val = terms.sum()
        # rounding floor: func itself carries a few ulps per node, growing with n
        tiny = 16 * np.sqrt(n) * _EPS
        if near:
            floor = tiny * (np.sum(r.weights * (np.abs(fx) + abs(fz)) / np.abs(z - r.nodes))
                                 + abs(singular))
        else:
            floor = tiny * np.abs(terms).sum()
        if prev is not None and abs(val - prev) <= max(rtol * abs(val), floor):
            return val
        prev = val
        n *= 2
    raise NoConvergenceError(f"Cauchy integral at z={z} unresolved with {MAX_NODES} nodes")
