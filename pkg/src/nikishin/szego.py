"""Szego functions on slit domains and the boundary-value fixed point T_w.

A Szego function is stored through the log of its boundary data,

    F(x) = -ln |G(x)|^2 = pow_b ln(b - x) + pow_a ln(x - a) + smooth(x),

and G = exp(-S/2) where S is the holomorphic extension of F off the interval with
S real for z > b.  In the Joukowski variable phi (|phi| > 1 off the interval)

    S = sum c_k phi^-k + (pow_a + pow_b)(ln h - ln 2)
        + 2 pow_b ln(1 - 1/phi) + 2 pow_a ln(1 + 1/phi),

with c_k the Chebyshev coefficients of ``smooth`` and h the half length.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

import numpy as np

from .errors import (
    GeometryMismatchError,
    GridMismatchError,
    InvalidInputError,
    NoConvergenceError,
)
from .measures import Interval, MeasureSpec, NikishinSystem, as_interval
from .numerics import (
    ChebSeries,
    check_off_support,
    cheb_points_first,
    coeffs_first_kind,
    joukowski_inverse,
    to_unit,
)

DEFAULT_GRID = 256


def _is_inf(z):
    return np.isscalar(z) and np.isinf(z)


@dataclass(frozen=True, eq=False)
class LogWeight:
    interval: Interval
    pow_b: float
    pow_a: float
    smooth: ChebSeries

    def __call__(self, x):
        a, b = self.interval
        x = np.asarray(x, dtype=float)
        out = self.smooth(x)
        if self.pow_b:
            out = out + self.pow_b * np.log(b - x)
        if self.pow_a:
            out = out + self.pow_a * np.log(x - a)
        return out

    def endpoint_extension(self, z):
        """Holomorphic extension of the two endpoint logarithms."""
        a, b = self.interval
        z = np.asarray(z, dtype=complex)
        inv = 1.0 / joukowski_inverse(to_unit(z, (a, b)))
        out = (self.pow_a + self.pow_b) * (np.log(0.5 * (b - a)) - np.log(2.0)) + 0.0 * inv
        if self.pow_b:
            out = out + 2.0 * self.pow_b * np.log(1.0 - inv)
        if self.pow_a:
            out = out + 2.0 * self.pow_a * np.log(1.0 + inv)
        return out

    def extension(self, z):
        """S(z); z = inf allowed."""
        a, b = self.interval
        if _is_inf(z):
            return complex(self.smooth.coeffs[0]
                           + (self.pow_a + self.pow_b) * (np.log(0.5 * (b - a)) - np.log(2.0)))
        z = np.asarray(z, dtype=complex)
        inv = 1.0 / joukowski_inverse(to_unit(z, (a, b)))
        smooth = np.polynomial.polynomial.polyval(inv, self.smooth.coeffs)
        return smooth + self.endpoint_extension(z)

    def shifted(self, const):
        c = np.array(self.smooth.coeffs)
        c[0] += const
        return LogWeight(self.interval, self.pow_b, self.pow_a, ChebSeries(self.smooth.interval, c))

    def __add__(self, other):
        if tuple(self.interval) != tuple(other.interval):
            raise GeometryMismatchError("log weights live on different intervals")
        n = max(self.smooth.coeffs.size, other.smooth.coeffs.size)
        c = np.zeros(n)
        c[:self.smooth.coeffs.size] += self.smooth.coeffs
        c[:other.smooth.coeffs.size] += other.smooth.coeffs
        return LogWeight(self.interval, self.pow_b + other.pow_b, self.pow_a + other.pow_a,
                         ChebSeries(self.smooth.interval, c))

    @classmethod
    def of_measure(cls, spec: MeasureSpec):
        """F = ln(sqrt((b-x)(x-a)) sigma'(x)) for a Jacobi-type measure."""
        iv = spec.interval
        smooth = ChebSeries.fit(lambda x: np.log(spec.smooth_factor(x)), tuple(iv))
        return cls(iv, spec.alpha + 0.5, spec.beta + 0.5, smooth)

    @classmethod
    def from_samples(cls, interval, weight_samples, alpha=-0.5, beta=-0.5):
        """F from samples of mu' at first-kind Chebyshev points.

        ``alpha``/``beta`` are the endpoint exponents of mu' (powers of b-x and x-a);
        dividing them out must leave a smooth positive function.
        """
        iv = as_interval(interval)
        w = np.asarray(weight_samples, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InvalidInputError("weight samples must be a non-empty vector", kind="size-mismatch")
        if not np.all(w > 0):
            raise InvalidInputError("weight samples must be positive", kind="nonpositive-weight")
        a, b = iv
        x = cheb_points_first(w.size, (a, b))
        smooth = np.log(w) - alpha * np.log(b - x) - beta * np.log(x - a)
        series = ChebSeries((a, b), coeffs_first_kind(smooth)).truncate()
        return cls(iv, alpha + 0.5, beta + 0.5, series)


@dataclass(frozen=True, eq=False)
class SzegoFunction:
    log_weight: LogWeight

    @property
    def interval(self):
        return self.log_weight.interval

    def log(self, z):
        """ln G(z), holomorphic off the interval, real for real z outside it."""
        if not _is_inf(z):
            check_off_support(z, tuple(self.interval))
        return -0.5 * self.log_weight.extension(z)

    def __call__(self, z):
        return np.exp(self.log(z))

    @property
    def at_infinity(self):
        return float(np.exp(self.log(np.inf)).real)

    def boundary_modulus_sq(self, x):
        """|G(x +- i0)|^2 from the representing weight."""
        return np.exp(-self.log_weight(x))

    def scaled(self, factor):
        return SzegoFunction(self.log_weight.shifted(-2.0 * np.log(factor)))


def szego_function(interval, weight_samples, z, alpha=-0.5, beta=-0.5):
    """G(mu, z) for mu' sampled at first-kind Chebyshev points (see LogWeight.from_samples)."""
    G = SzegoFunction(LogWeight.from_samples(interval, weight_samples, alpha, beta))
    return G(z)


def harmonic_extension(interval, boundary_samples, z):
    """Bounded harmonic extension off the interval of data sampled at first-kind points."""
    iv = as_interval(interval)
    c = coeffs_first_kind(np.asarray(boundary_samples, dtype=float))
    if _is_inf(z):
        return float(c[0])
    check_off_support(z, tuple(iv))
    inv = 1.0 / joukowski_inverse(to_unit(np.asarray(z, dtype=complex), tuple(iv)))
    return np.polynomial.polynomial.polyval(inv, c).real


def poisson_matrix(interval, n_source, targets):
    """Discrete exterior Poisson kernel: rows give the harmonic extension at real
    ``targets`` (off the interval) of data at the n_source first-kind points.  All
    entries are positive and rows sum to 1 up to quadrature error."""
    a, b = as_interval(interval)
    x = cheb_points_first(n_source, (a, b))
    y = np.asarray(targets, dtype=float)
    g = np.sqrt(np.abs(y - a) * np.abs(y - b))
    return g[:, None] / np.abs(y[:, None] - x[None, :]) / n_source


@dataclass(frozen=True, eq=False)
class BoundaryVectorFunction:
    """Positive functions f_j sampled on the grids of Delta_{j-1} and Delta_{j+1}.

    ``logs[j-1]`` maps a neighbour index k to ln f_j on the grid of Delta_k.
    """

    grids: tuple
    logs: tuple

    @property
    def m(self):
        return len(self.grids)

    def values(self, j, k):
        return np.exp(self.logs[j - 1][k])

    @classmethod
    def from_logs(cls, grids, fun):
        """fun(j, k, x) -> ln f_j at grid points x of Delta_k."""
        m = len(grids)
        logs = []
        for j in range(1, m + 1):
            d = {}
            for k in (j - 1, j + 1):
                if 1 <= k <= m:
                    d[k] = np.asarray(fun(j, k, grids[k - 1]), dtype=float)
            logs.append(d)
        return cls(tuple(grids), tuple(logs))

    @classmethod
    def constant(cls, grids, value=1.0):
        lv = np.log(value)
        return cls.from_logs(grids, lambda j, k, x: np.full(x.size, lv))

    @classmethod
    def from_values(cls, grids, fun):
        """fun(j, k, x) -> f_j (positive) at grid points x of Delta_k."""
        def lg(j, k, x):
            v = np.asarray(fun(j, k, x), dtype=float)
            if not np.all(v > 0):
                raise InvalidInputError("boundary values must be positive", kind="nonpositive-input")
            return np.log(v)
        return cls.from_logs(grids, lg)


def metric_d(f: BoundaryVectorFunction, g: BoundaryVectorFunction):
    if f.m != g.m:
        raise GridMismatchError("boundary vectors of different length")
    worst = 0.0
    for lf, lg in zip(f.logs, g.logs):
        if lf.keys() != lg.keys():
            raise GridMismatchError("boundary vectors on different grids")
        for k in lf:
            if lf[k].shape != lg[k].shape:
                raise GridMismatchError("boundary vectors on different grids")
            if not (np.all(np.isfinite(lf[k])) and np.all(np.isfinite(lg[k]))):
                raise InvalidInputError("boundary values must be positive", kind="nonpositive-input")
            worst = max(worst, float(np.max(np.abs(lf[k] - lg[k]), initial=0.0)))
    return worst


class SzegoWeightVector:
    """w_j = sqrt((b_j-x)(x-a_j)) h_j(x) sigma_j'(x), h_j = |(x-b_{j+1})(x-a_{j+1})|^{-1/2}
    (h_m = 1), plus the fixed grids and Poisson matrices used by T_w."""

    def __init__(self, log_weights, n_grid=DEFAULT_GRID):
        self.log_weights = tuple(log_weights)
        self.m = len(self.log_weights)
        self.intervals = tuple(lw.interval for lw in self.log_weights)
        self.n_grid = int(n_grid)
        self.grids = tuple(cheb_points_first(self.n_grid, tuple(iv)) for iv in self.intervals)
        self._smooth = tuple(lw.smooth(x) for lw, x in zip(self.log_weights, self.grids))
        self._poisson = {}
        self._endpoint = {}
        for j in range(self.m):
            for k in (j - 1, j + 1):
                if 0 <= k < self.m:
                    y = self.grids[k]
                    self._poisson[j, k] = poisson_matrix(self.intervals[j], self.n_grid, y)
                    self._endpoint[j, k] = self.log_weights[j].endpoint_extension(y).real

    @classmethod
    def from_system(cls, system: NikishinSystem, n_grid=DEFAULT_GRID):
        lws = []
        for j, g in enumerate(system.generators):
            lw = LogWeight.of_measure(g)
            if j + 1 < system.m:
                nb = system.generators[j + 1].interval
                corr = ChebSeries.fit(
                    lambda x, nb=nb: -0.5 * np.log(np.abs((x - nb.a) * (x - nb.b))), tuple(g.interval))
                lw = lw + LogWeight(g.interval, 0.0, 0.0, corr)
            lws.append(lw)
        return cls(lws, n_grid)

    def samples(self, j):
        """w_j on the grid of Delta_j."""
        return np.exp(self.log_weights[j - 1](self.grids[j - 1]))

    def initial(self):
        return BoundaryVectorFunction.constant(self.grids)

    def check(self, f: BoundaryVectorFunction):
        if f.m != self.m or any(x.shape != y.shape for x, y in zip(f.grids, self.grids)):
            raise GridMismatchError("boundary vector does not match the weight geometry")


def _component_log(w: SzegoWeightVector, f: BoundaryVectorFunction, j):
    """Smooth samples on the Delta_j grid of ln w_j - ln f_{j-1} - ln f_{j+1} (0-based j)."""
    F = w._smooth[j].copy()
    for k in (j - 1, j + 1):
        if 0 <= k < w.m:
            F = F - f.logs[k][j + 1]
    return F


def apply_T(w: SzegoWeightVector, f: BoundaryVectorFunction):
    w.check(f)
    logs = []
    for j in range(w.m):
        F = _component_log(w, f, j)
        d = {}
        for k in (j - 1, j + 1):
            if 0 <= k < w.m:
                d[k + 1] = -0.5 * (w._poisson[j, k] @ F + w._endpoint[j, k])
        logs.append(d)
    return BoundaryVectorFunction(w.grids, tuple(logs))


def contraction_constant(m):
    if m < 2:
        raise InvalidInputError("contraction constant needs m >= 2")
    mb = ceil(m / 2)
    return Fraction(2 ** mb - 1, 2 ** mb) if m % 2 == 0 else Fraction(2 ** mb - 2, 2 ** mb)


@dataclass(frozen=True, eq=False)
class SzegoVector:
    components: tuple
    boundary: BoundaryVectorFunction
    distances: tuple

    @property
    def m(self):
        return len(self.components)

    @property
    def iterations(self):
        return len(self.distances)

    def __getitem__(self, j):
        """1-based component; 0 and m+1 give the constant 1."""
        if j == 0 or j == self.m + 1:
            return _ONE
        return self.components[j - 1]

    def at_infinity(self):
        return np.array([G.at_infinity for G in self.components])

    def scaled(self, j, factor):
        comps = list(self.components)
        comps[j - 1] = comps[j - 1].scaled(factor)
        return SzegoVector(tuple(comps), self.boundary, self.distances)


class _Unit:
    at_infinity = 1.0

    def __call__(self, z):
        return np.ones_like(np.asarray(z, dtype=complex)) if not _is_inf(z) else 1.0

    def log(self, z):
        return np.zeros_like(np.asarray(z, dtype=complex)) if not _is_inf(z) else 0.0


_ONE = _Unit()


def materialize(w: SzegoWeightVector, f: BoundaryVectorFunction):
    """Szego functions with |G_j|^2 = f_{j-1} f_{j+1} / w_j on Delta_j."""
    comps = []
    for j in range(w.m):
        lw = w.log_weights[j]
        F = _component_log(w, f, j) - w._smooth[j]
        corr = ChebSeries(tuple(lw.interval), coeffs_first_kind(F)).truncate()
        comps.append(SzegoFunction(lw + LogWeight(lw.interval, 0.0, 0.0, corr)))
    return tuple(comps)


def fixed_point_T(w: SzegoWeightVector, tol=1e-12, max_iter=500):
    f = w.initial()
    dists = []
    for _ in range(max_iter):
        g = apply_T(w, f)
        d = metric_d(g, f)
        dists.append(d)
        f = g
        if d < tol:
            break
    else:
        raise NoConvergenceError(f"T_w iteration stalled at d={dists[-1]:.3e}")
    return SzegoVector(materialize(w, f), f, tuple(dists))


def szego_vector(system: NikishinSystem, tol=1e-12, n_grid=DEFAULT_GRID, max_iter=500):
    return fixed_point_T(SzegoWeightVector.from_system(system, n_grid), tol, max_iter)


def boundcond_residual(G: SzegoVector, system: NikishinSystem, n_check=DEFAULT_GRID):
    if G.m != system.m or any(tuple(c.interval) != tuple(iv)
                              for c, iv in zip(G.components, system.intervals)):
        raise GeometryMismatchError("Szego vector and system have different geometry")
    worst = 0.0
    m = system.m
    for j in range(1, m + 1):
        spec = system.generator(j)
        a, b = spec.interval
        x = cheb_points_first(n_check, (a, b))
        lhs = G[j].boundary_modulus_sq(x) * np.sqrt((b - x) * (x - a)) * spec.density(x)
        rhs = np.ones_like(x)
        if j < m:
            nb = system.intervals[j]
            rhs = rhs * np.sqrt(np.abs((x - nb.a) * (x - nb.b))) * G[j + 1](x).real
        if j > 1:
            rhs = rhs * G[j - 1](x).real
        scale = np.max(np.abs(rhs))
        worst = max(worst, float(np.max(np.abs(lhs - rhs)) / scale))
    return worst
