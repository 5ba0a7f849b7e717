"""Generating measures, Nikishin systems and their nested Cauchy transforms."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, NoConvergenceError, OverlapError
from .numerics import (
    ChebSeries,
    MAX_NODES,
    QuadratureRule,
    bernstein_rho,
    check_off_support,
    endpoints,
    gauss_jacobi_rule,
    jacobi_cauchy_integral,
)


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        a, b = endpoints((self.a, self.b))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __iter__(self):
        yield self.a
        yield self.b

    @property
    def length(self):
        return self.b - self.a

    @property
    def center(self):
        return 0.5 * (self.a + self.b)

    @property
    def half(self):
        return 0.5 * (self.b - self.a)

    def contains(self, x):
        x = np.asarray(x)
        return (x >= self.a) & (x <= self.b)

    def overlaps(self, other):
        return not (self.b < other.a or other.b < self.a)

    def gap(self, other):
        return max(other.a - self.b, self.a - other.b, 0.0)

    def __str__(self):
        return f"[{self.a:g}, {self.b:g}]"


def as_interval(obj):
    return obj if isinstance(obj, Interval) else Interval(*obj)


@dataclass(frozen=True, eq=False)
class MeasureSpec:
    """dsigma = scale * (b-x)^alpha (x-a)^beta * modifier(x) dx on ``interval``.

    ``scale`` is 1/raw mass when ``mass_normalized`` and 1 otherwise.  A missing
    modifier means the constant 1.
    """

    interval: Interval
    alpha: float = 0.0
    beta: float = 0.0
    modifier: ChebSeries | None = None
    mass_normalized: bool = True
    scale: float = field(init=False, default=1.0)
    raw_mass: float = field(init=False, default=1.0)
    _rules: dict = field(init=False, default_factory=dict, repr=False)

    def __post_init__(self):
        iv = as_interval(self.interval)
        object.__setattr__(self, "interval", iv)
        alpha, beta = float(self.alpha), float(self.beta)
        if not (alpha > -1.0 and beta > -1.0):
            raise InvalidInputError(f"exponents must exceed -1, got ({alpha}, {beta})",
                                    kind="invalid-exponent")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        g = self.modifier if self.modifier is not None else ChebSeries.constant(1.0, tuple(iv))
        if tuple(g.interval) != tuple(iv):
            g = ChebSeries(tuple(iv), g.coeffs)
        object.__setattr__(self, "modifier", g)
        grid = np.linspace(iv.a, iv.b, 512)
        if not np.min(g(grid)) > 0.0:
            raise InvalidInputError("modifier must be strictly positive on the interval",
                                    kind="nonpositive-modifier")
        n = max(32, g.degree // 2 + 2)
        r = gauss_jacobi_rule(tuple(iv), alpha, beta, n)
        raw = float(r.weights @ g(r.nodes))
        object.__setattr__(self, "raw_mass", raw)
        object.__setattr__(self, "scale", 1.0 / raw if self.mass_normalized else 1.0)

    @classmethod
    def from_function(cls, interval, alpha, beta, func, mass_normalized=True):
        iv = as_interval(interval)
        return cls(iv, alpha, beta, ChebSeries.fit(func, tuple(iv)), mass_normalized)

    @property
    def mass(self):
        return self.scale * self.raw_mass

    def smooth_factor(self, x):
        """scale * modifier(x); analytic, accepts complex arguments."""
        return self.scale * self.modifier(x)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.interval
        with np.errstate(divide="ignore", invalid="ignore"):
            return (np.abs(b - x) ** self.alpha * np.abs(x - a) ** self.beta
                    * self.smooth_factor(x))

    def rule(self, n):
        """Gauss rule for dsigma itself: nodes and weights include density and scale."""
        n = int(n)
        if n not in self._rules:
            r = gauss_jacobi_rule(tuple(self.interval), self.alpha, self.beta, n)
            w = r.weights * self.smooth_factor(r.nodes)
            w.setflags(write=False)
            self._rules[n] = QuadratureRule(r.nodes, w, r.interval)
        return self._rules[n]

    def scaled(self, factor):
        """Same shape, modifier multiplied by ``factor`` (normalization flag kept)."""
        return MeasureSpec(self.interval, self.alpha, self.beta,
                           self.modifier.scaled(factor), self.mass_normalized)

    def describe(self):
        return (f"{self.interval} alpha={self.alpha:g} beta={self.beta:g} "
                f"modifier_degree={self.modifier.degree} normalized={self.mass_normalized}")


def szego_integral(spec: MeasureSpec, tol=1e-13):
    """int ln rho d eta over the interval, where d eta = dx / sqrt((b-x)(x-a)).

    The endpoint logarithms integrate in closed form, each to pi*ln((b-a)/4); the
    remaining smooth part uses Gauss-Chebyshev rules doubled until they agree.
    """
    a, b = spec.interval
    total = (spec.alpha + spec.beta) * np.pi * np.log((b - a) / 4.0)
    n, prev = 16, None
    while n <= MAX_NODES:
        r = gauss_jacobi_rule((a, b), -0.5, -0.5, n)
        vals = spec.smooth_factor(r.nodes)
        if np.any(vals <= 0):
            raise NoConvergenceError("density not positive on the interval", kind="divergent")
        cur = float(r.weights @ np.log(vals))
        if prev is not None and abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return total + cur
        prev = cur
        n *= 2
    raise NoConvergenceError("Szego integral did not converge", kind="divergent")


def cauchy_transform(spec: MeasureSpec, z, rtol=1e-12):
    """sigma-hat(z) = int dsigma(x) / (z - x) for z off the interval (scalar or array)."""
    return _vectorized(lambda zz: jacobi_cauchy_integral(
        spec.smooth_factor, tuple(spec.interval), spec.alpha, spec.beta, zz, rtol=rtol), z)


def _vectorized(fun, z):
    z = np.asarray(z, dtype=complex)
    out = np.array([fun(complex(v)) for v in z.ravel()], dtype=complex).reshape(z.shape)
    return out[()] if out.ndim == 0 else out


def _nodes_needed(inner: Interval, outer: Interval, digits=17.0):
    """Gauss nodes on ``inner`` that resolve a pole at the nearest point of ``outer``."""
    nearest = outer.a if outer.a > inner.b else outer.b
    rho = float(bernstein_rho(nearest, tuple(inner)))
    return int(np.ceil(digits * np.log(10.0) / (2.0 * np.log(rho)))) + 16


class NikishinSystem:
    """Generators sigma_1..sigma_m on consecutive-disjoint intervals.

    Indices in the public methods are 1-based.  ``rule(j)`` is the cached Gauss rule
    of sigma_j whose size resolves the neighbours' Cauchy kernels to full precision;
    ``inner_on_nodes(j, k)`` holds s-hat_{j+1,k} on the nodes of that rule.
    """

    def __init__(self, generators, n_quad=96):
        gens = tuple(generators)
        if len(gens) < 1:
            raise InvalidInputError("a Nikishin system needs at least one generator")
        for g in gens:
            if not isinstance(g, MeasureSpec):
                raise InvalidInputError("generators must be MeasureSpec instances")
        for j in range(len(gens) - 1):
            I, J = gens[j].interval, gens[j + 1].interval
            if I.overlaps(J):
                raise OverlapError(f"consecutive intervals {I} and {J} intersect")
        self.generators = gens
        self.m = len(gens)
        sizes = []
        for j, g in enumerate(gens):
            n = n_quad
            for k in (j - 1, j + 1):
                if 0 <= k < self.m:
                    n = max(n, _nodes_needed(g.interval, gens[k].interval))
            sizes.append(min(n, MAX_NODES))
        self.n_quad = tuple(sizes)
        self._inner = {}

    @property
    def intervals(self):
        return tuple(g.interval for g in self.generators)

    def generator(self, j):
        self._check_index(j)
        return self.generators[j - 1]

    def _check_index(self, *idx):
        for j in idx:
            if not (1 <= j <= self.m):
                raise InvalidInputError(f"index {j} outside 1..{self.m}", kind="index-out-of-range")

    def rule(self, j, n=None):
        self._check_index(j)
        return self.generators[j - 1].rule(self.n_quad[j - 1] if n is None else n)

    def reversed(self):
        return NikishinSystem(self.generators[::-1])

    def scaled(self, factors):
        return NikishinSystem([g.scaled(f) for g, f in zip(self.generators, factors)])

    def inner_on_nodes(self, j, k, n=None):
        """s-hat_{j+1,k} at the nodes of rule(j, n); identically 1 when k == j."""
        self._check_index(j, k)
        if k < j:
            raise InvalidInputError("need j <= k", kind="index-out-of-range")
        key = (j, k, n)
        if key not in self._inner:
            nodes = self.rule(j, n).nodes
            if k == j:
                vals = np.ones(nodes.size)
            else:
                vals = self.inner_eval(j + 1, k, nodes).real
            vals.setflags(write=False)
            self._inner[key] = vals
        return self._inner[key]

    def inner_eval(self, i, k, x):
        """s-hat_{i,k}(x) by the cached nested rule; accurate for x well separated from Delta_i."""
        r = self.rule(i)
        dens = r.weights * self.inner_on_nodes(i, k)
        x = np.asarray(x, dtype=complex)
        return (dens / (x[..., None] - r.nodes)).sum(axis=-1)

    def transfer_matrix(self, i, n_rows=None, n_cols=None):
        """M[p, l] = W_l / (x_p - t_l): maps values on Delta_{i+1} nodes to Cauchy
        transforms against sigma_{i+1} at Delta_i nodes."""
        self._check_index(i, i + 1)
        x = self.rule(i, n_rows).nodes
        r = self.rule(i + 1, n_cols)
        return r.weights[None, :] / (x[:, None] - r.nodes[None, :])


def shat_eval(system: NikishinSystem, j, k, z, rtol=1e-12):
    """s-hat_{j,k}(z) = int s-hat_{j+1,k}(x) dsigma_j(x) / (z - x), z off Delta_j."""
    system._check_index(j, k)
    if k < j:
        raise InvalidInputError("need j <= k", kind="index-out-of-range")
    g = system.generator(j)
    check_off_support(z, tuple(g.interval))
    if k == j:
        f = g.smooth_factor
    else:
        def f(x):
            return g.smooth_factor(x) * system.inner_eval(j + 1, k, x)
    return _vectorized(lambda zz: jacobi_cauchy_integral(
        f, tuple(g.interval), g.alpha, g.beta, zz, rtol=rtol), z)


def nested_moments(system: NikishinSystem, j, k, max_degree):
    """int x^nu ds_{j,k}(x) for nu = 0..max_degree."""
    system._check_index(j, k)
    if k < j:
        raise InvalidInputError("need j <= k", kind="index-out-of-range")
    if max_degree < 0:
        raise InvalidInputError("max_degree must be nonnegative")
    n = max(system.n_quad[j - 1], int(max_degree) // 2 + 32)
    r = system.rule(j, n)
    dens = r.weights * system.inner_on_nodes(j, k, n)
    powers = r.nodes[None, :] ** np.arange(max_degree + 1)[:, None]
    return powers @ dens
