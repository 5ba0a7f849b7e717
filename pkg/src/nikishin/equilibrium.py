"""Vector equilibrium problem with the tridiagonal Nikishin interaction matrix.

Each lambda_j is stored through its smooth factor against the arcsine weight,
lambda_j'(x) = u_j(x) / (pi sqrt((b_j - x)(x - a_j))), sampled at first-kind
Chebyshev points.  With that representation the arcsine quadrature has equal
weights 1/N, balayage has a closed-form kernel, and logarithmic potentials follow
from the Chebyshev coefficients of u_j.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, NoConvergenceError, OverlapError
from .measures import Interval, as_interval
from .numerics import (
    ChebSeries,
    check_off_support,
    cheb_points_first,
    coeffs_first_kind,
    joukowski_inverse,
    to_unit,
)

DEFAULT_GRID = 256


@dataclass(frozen=True)
class RaySpec:
    p: tuple
    P: tuple = field(init=False)

    def __post_init__(self):
        p = tuple(float(v) for v in self.p)
        if len(p) < 1:
            raise InvalidInputError("empty ray", kind="invalid-ray")
        if not p[0] > 0.0 or any(v < 0.0 for v in p):
            raise InvalidInputError(f"ray entries must be >= 0 with p_1 > 0, got {p}", kind="invalid-ray")
        if abs(sum(p) - 1.0) > 1e-14 * len(p):
            raise InvalidInputError(f"ray must sum to 1, got {sum(p)!r}", kind="invalid-ray")
        if any(p[i + 1] > p[i] for i in range(len(p) - 1)):
            raise InvalidInputError(f"ray not nonincreasing: {p}", kind="invalid-ray")
        object.__setattr__(self, "p", p)
        P = np.cumsum(p)
        P[-1] = 1.0
        object.__setattr__(self, "P", tuple(float(v) for v in P))

    @property
    def m(self):
        return len(self.p)

    @classmethod
    def from_multi_index(cls, n):
        tot = sum(n)
        return cls(tuple(v / tot for v in n))


def interaction_matrix(ray: RaySpec):
    P = np.asarray(ray.P)
    C = np.diag(P ** 2)
    off = -0.5 * P[:-1] * P[1:]
    return C + np.diag(off, 1) + np.diag(off, -1)


@dataclass(frozen=True)
class GridMeasure:
    """Discrete stand-in for a measure: sum_i weights[i] delta(nodes[i])."""

    interval: Interval
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def mass(self):
        return float(np.sum(self.weights))

    @classmethod
    def point_mass(cls, t0, mass=1.0):
        t0 = float(t0)
        eps = 1e-15 * max(1.0, abs(t0))
        return cls(Interval(t0 - eps, t0 + eps), np.array([t0]), np.array([float(mass)]))

    def __add__(self, other):
        a = min(self.interval.a, other.interval.a)
        b = max(self.interval.b, other.interval.b)
        return GridMeasure(Interval(a, b), np.concatenate([self.nodes, other.nodes]),
                           np.concatenate([self.weights, other.weights]))


@dataclass(frozen=True, eq=False)
class ArcsineDensity:
    """u(x) / (pi sqrt((b-x)(x-a))) with u sampled at N first-kind Chebyshev points."""

    interval: Interval
    u: np.ndarray

    @property
    def n(self):
        return self.u.size

    @property
    def nodes(self):
        return cheb_points_first(self.n, tuple(self.interval))

    @property
    def coeffs(self):
        return coeffs_first_kind(self.u)

    @property
    def mass(self):
        return float(np.mean(self.u))

    def factor(self, x):
        return ChebSeries(tuple(self.interval), self.coeffs)(np.asarray(x, dtype=float))

    def density(self, x):
        a, b = self.interval
        x = np.asarray(x, dtype=float)
        return self.factor(x) / (np.pi * np.sqrt((b - x) * (x - a)))

    def as_grid_measure(self):
        return GridMeasure(self.interval, self.nodes, self.u / self.n)

    def log_transform(self, z):
        """L(z) = int ln(z - x) d lambda(x): holomorphic off (-inf, b], real for z > b."""
        a, b = self.interval
        h = 0.5 * (b - a)
        z = np.asarray(z, dtype=complex)
        phi = joukowski_inverse(to_unit(z, (a, b)))
        c = self.coeffs
        k = np.arange(1, c.size)
        inv = 1.0 / phi
        # Clenshaw-free power sum; |1/phi| <= 1 so the terms are bounded by |c_k|/k
        s = np.polynomial.polynomial.polyval(inv, np.concatenate([[0.0], c[1:] / k]))
        return c[0] * (np.log(h) + np.log(phi / 2.0)) - s

    def potential(self, z):
        """V(z) = int ln(1/|z-x|) d lambda(x); also valid on the interval itself."""
        return -self.log_transform(z).real


def balayage_onto(source: GridMeasure, target, n_points=DEFAULT_GRID):
    """Smooth factor (against the arcsine weight of ``target``) of Bal(source)."""
    target = as_interval(target)
    a, b = target
    if np.any((source.nodes >= a) & (source.nodes <= b)) or target.overlaps(source.interval):
        raise OverlapError(f"source support {source.interval} meets target {target}")
    x = cheb_points_first(n_points, (a, b))
    t = source.nodes
    g = np.sqrt(np.abs(t - a) * np.abs(t - b))
    K = g[None, :] / np.abs(t[None, :] - x[:, None])
    return ArcsineDensity(target, K @ source.weights)


def _balayage_matrix(src: Interval, tgt: Interval, n_src, n_tgt):
    a, b = tgt
    t = cheb_points_first(n_src, tuple(src))
    x = cheb_points_first(n_tgt, tuple(tgt))
    g = np.sqrt(np.abs(t - a) * np.abs(t - b))
    return g[None, :] / np.abs(t[None, :] - x[:, None]) / n_src


@dataclass(frozen=True, eq=False)
class EquilibriumSolution:
    intervals: tuple
    ray: RaySpec
    densities: tuple
    robin_constants: np.ndarray
    iteration_report: tuple
    rate: float

    @property
    def m(self):
        return len(self.intervals)

    @property
    def C(self):
        return np.exp(self.robin_constants)

    def lam(self, j):
        return self.densities[j - 1]


def _mixed_potential(dens, P, j, x):
    """V^{lambda_j} - 1/2 [P_{j-1}/P_j V^{lambda_{j-1}} + P_{j+1}/P_j V^{lambda_{j+1}}] at x."""
    m = len(dens)
    out = dens[j - 1].potential(x)
    for k in (j - 1, j + 1):
        if 1 <= k <= m:
            out = out - 0.5 * P[k - 1] / P[j - 1] * dens[k - 1].potential(x)
    return out


def solve_vector_equilibrium(intervals, ray: RaySpec, tol=1e-13, max_sweeps=500,
                             n_points=DEFAULT_GRID, damping=1.0):
    """Balayage sweep u_j <- 1/2 sum_k (P_k/P_j) Bal(lambda_k) + (1 - c_j/2), Jacobi style."""
    ivs = tuple(as_interval(iv) for iv in intervals)
    m = len(ivs)
    if m != ray.m:
        raise InvalidInputError(f"{m} intervals but ray of length {ray.m}", kind="geometry-mismatch")
    for j in range(m - 1):
        if ivs[j].overlaps(ivs[j + 1]):
            raise OverlapError(f"consecutive intervals {ivs[j]} and {ivs[j + 1]} intersect")
    if not 0.0 < damping <= 1.0:
        raise InvalidInputError("damping must lie in (0, 1]")
    P = np.asarray(ray.P)
    N = int(n_points)
    coupling = {}
    for j in range(m):
        for k in (j - 1, j + 1):
            if 0 <= k < m:
                coupling[j, k] = 0.5 * P[k] / P[j] * _balayage_matrix(ivs[k], ivs[j], N, N)
    c = np.array([sum(P[k] for k in (j - 1, j + 1) if 0 <= k < m) / P[j] for j in range(m)])
    u = [np.ones(N) for _ in range(m)]
    history = []
    for sweep in range(max_sweeps):
        new = []
        for j in range(m):
            v = np.full(N, 1.0 - 0.5 * c[j])
            for k in (j - 1, j + 1):
                if (j, k) in coupling:
                    v = v + coupling[j, k] @ u[k]
            new.append((1.0 - damping) * u[j] + damping * v)
        d = max(float(np.max(np.abs(nw - old))) for nw, old in zip(new, u))
        u = new
        history.append(d)
        if d < tol:
            break
    else:
        raise NoConvergenceError(f"equilibrium sweep stalled at {history[-1]:.3e} "
                                 f"after {max_sweeps} sweeps")
    rate = _observed_rate(history)
    if rate >= 0.95:
        raise NoConvergenceError(f"equilibrium sweep not geometric (rate {rate:.3f})")
    dens = tuple(ArcsineDensity(iv, uj) for iv, uj in zip(ivs, u))
    omega = np.array([_mixed_potential(dens, P, j, ivs[j - 1].center) for j in range(1, m + 1)])
    return EquilibriumSolution(ivs, ray, dens, omega, tuple(history), rate)


def _observed_rate(history, burn_in=5, floor=1e-13):
    """Geometric mean contraction of the sweep changes after the burn-in, ignoring
    the round-off floor."""
    h = [d for d in history[burn_in:] if d > floor]
    if len(h) < 2:
        return 0.0
    return float((h[-1] / h[0]) ** (1.0 / (len(h) - 1)))


def potential(solution: EquilibriumSolution, j, z):
    return solution.lam(j).potential(z)


def phi_eval(solution: EquilibriumSolution, j, z):
    """Phi_j(z) = exp(int ln(z - x) d lambda_j(x)), z off Delta_j; also accepts inf."""
    if np.isscalar(z) and np.isinf(z):
        return complex(np.inf)
    check_off_support(z, tuple(solution.intervals[j - 1]))
    return np.exp(solution.lam(j).log_transform(z))


def log_phi(solution: EquilibriumSolution, j, z):
    """Continuous branch of ln Phi_j(z) off (-inf, b_j]; use for large powers."""
    check_off_support(z, tuple(solution.intervals[j - 1]))
    return solution.lam(j).log_transform(z)


def equilibrium_residual(solution: EquilibriumSolution, n_check=256):
    P = np.asarray(solution.ray.P)
    worst = 0.0
    for j in range(1, solution.m + 1):
        x = cheb_points_first(n_check, tuple(solution.intervals[j - 1]))
        r = _mixed_potential(solution.densities, P, j, x) - solution.robin_constants[j - 1]
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def perturbed(solution: EquilibriumSolution, j, delta):
    """Copy of ``solution`` with u_j shifted by ``delta`` (constants untouched)."""
    dens = list(solution.densities)
    d = dens[j - 1]
    dens[j - 1] = ArcsineDensity(d.interval, d.u + delta)
    return EquilibriumSolution(solution.intervals, solution.ray, tuple(dens),
                               solution.robin_constants, solution.iteration_report, solution.rate)
