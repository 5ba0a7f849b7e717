"""Run configuration: YAML schema, validation with line references, demo lookup."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .equilibrium import RaySpec
from .errors import ConfigError, InvalidInputError
from .measures import Interval, MeasureSpec, NikishinSystem
from .numerics import ChebSeries

DEMOS = ("m1-arcsine", "m2-jacobi", "m2-lebesgue", "m3-chain")

_TOP = {"name", "system", "ray", "k_list", "tolerances", "grid", "test_points", "output",
        "max_degree"}
_GEN = {"interval", "alpha", "beta", "modifier", "normalized"}
_TOL = {"equilibrium", "fixed_point", "hp_degree_cap"}
_GRID = {"equilibrium", "szego"}


@dataclass(frozen=True)
class GeneratorConfig:
    interval: tuple
    alpha: float = 0.0
    beta: float = 0.0
    modifier: tuple = (1.0,)
    normalized: bool = True

    def measure(self):
        iv = tuple(self.interval)
        return MeasureSpec(iv, self.alpha, self.beta, ChebSeries(iv, np.array(self.modifier, float)),
                           self.normalized)


@dataclass(frozen=True)
class RunConfig:
    generators: tuple
    ray: tuple
    k_list: tuple
    name: str = "run"
    tol_eq: float = 1e-13
    tol_fp: float = 1e-12
    degree_cap: int = 24
    eq_grid: int = 256
    szego_grid: int = 256
    max_degree: int = 8
    test_points: tuple | None = None
    out_dir: str = "out"
    source: str = field(default="", compare=False)

    @property
    def m(self):
        return len(self.generators)

    def system(self):
        return NikishinSystem([g.measure() for g in self.generators])

    def ray_spec(self):
        return RaySpec(self.ray)

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def demo_path(name):
    if name not in DEMOS:
        raise InvalidInputError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")
    return resources.files("nikishin") / "demos" / f"{name}.yaml"


def _line_index(node, path=(), out=None):
    """Map key paths (tuples of str/int) to 1-based source lines."""
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            _line_index(v, path + (k.value,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_index(v, path + (i,), out)
    return out


def _fmt(path):
    s = ""
    for p in path:
        s += f"[{p}]" if isinstance(p, int) else (f".{p}" if s else p)
    return s or "<root>"


class _Collector:
    def __init__(self, lines):
        self.lines = lines
        self.errors = []

    def add(self, path, msg):
        line = None
        p = tuple(path)
        while line is None and p is not None:
            line = self.lines.get(p)
            p = p[:-1] if p else None
        self.errors.append(f"line {line or '?'}: {_fmt(path)}: {msg}")

    def number(self, data, key, path, default, positive=False, integer=False):
        if key not in data or data[key] is None:
            return default
        v = data[key]
        try:
            if isinstance(v, bool):
                raise TypeError
            v = int(v) if integer else float(v)
            if integer and float(data[key]) != v:
                raise ValueError
        except (TypeError, ValueError):
            self.add(path + (key,), f"expected {'an integer' if integer else 'a number'}, got {data[key]!r}")
            return default
        if positive and not v > 0:
            self.add(path + (key,), f"must be positive, got {v}")
        return v


def _complex(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    return complex(str(v).replace(" ", "").replace("i", "j"))


def parse_text(text, source="<string>"):
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"{source}: not valid YAML: {exc}"]) from exc
    if not isinstance(data, dict):
        raise ConfigError([f"{source}: top level must be a mapping"])
    col = _Collector(_line_index(node))
    for k in data:
        if k not in _TOP:
            col.add((k,), "unknown key")

    gens = []
    system = data.get("system")
    if not isinstance(system, list) or not system:
        col.add(("system",), "need a nonempty list of generators")
        system = []
    for i, g in enumerate(system):
        path = ("system", i)
        if not isinstance(g, dict):
            col.add(path, "generator must be a mapping")
            continue
        for k in g:
            if k not in _GEN:
                col.add(path + (k,), "unknown key")
        iv = g.get("interval")
        ok = (isinstance(iv, list) and len(iv) == 2
              and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in iv))
        if not ok or not float(iv[0]) < float(iv[1]):
            col.add(path + ("interval",), f"need [a, b] with a < b, got {iv!r}")
            continue
        alpha = col.number(g, "alpha", path, 0.0)
        beta = col.number(g, "beta", path, 0.0)
        if not (alpha > -1 and beta > -1):
            col.add(path, f"exponents must exceed -1, got ({alpha}, {beta})")
        mod = g.get("modifier", [1.0])
        if (not isinstance(mod, list) or not mod
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in mod)):
            col.add(path + ("modifier",), "need a list of Chebyshev coefficients")
            mod = [1.0]
        norm = g.get("normalized", True)
        if not isinstance(norm, bool):
            col.add(path + ("normalized",), "expected true/false")
            norm = True
        gens.append((i, GeneratorConfig((float(iv[0]), float(iv[1])), alpha, beta,
                                        tuple(float(v) for v in mod), norm)))
    for (i, g), (i2, g2) in zip(gens[:-1], gens[1:]):
        if Interval(*g.interval).overlaps(Interval(*g2.interval)):
            col.add(("system", i2, "interval"),
                    f"intervals {list(g.interval)} and {list(g2.interval)} overlap")

    m = len(system)
    ray = data.get("ray")
    if ray is None:
        ray = [1.0 / m] * m if m else []
    if not isinstance(ray, list) or len(ray) != m:
        col.add(("ray",), f"need a list of {m} weights, got {ray!r}")
        ray = [1.0 / max(m, 1)] * m
    else:
        try:
            ray = [float(Fraction(str(v))) for v in ray]
            if any(ray[i + 1] > ray[i] for i in range(len(ray) - 1)):
                col.add(("ray",), "ray not nonincreasing")
            elif abs(sum(ray) - 1.0) > 1e-12 or ray[0] <= 0 or min(ray) < 0:
                col.add(("ray",), "ray must be nonnegative, start positive and sum to 1")
        except (TypeError, ValueError, ZeroDivisionError):
            col.add(("ray",), f"ray entries must be numbers or fractions, got {ray!r}")

    k_list = data.get("k_list", [])
    if not isinstance(k_list, list) or not all(isinstance(k, int) and not isinstance(k, bool)
                                               and k > 0 for k in k_list):
        col.add(("k_list",), f"need a list of positive integers, got {k_list!r}")
        k_list = []

    tol = data.get("tolerances", {}) or {}
    if not isinstance(tol, dict):
        col.add(("tolerances",), "expected a mapping")
        tol = {}
    for k in tol:
        if k not in _TOL:
            col.add(("tolerances", k), "unknown key")
    tol_eq = col.number(tol, "equilibrium", ("tolerances",), 1e-13, positive=True)
    tol_fp = col.number(tol, "fixed_point", ("tolerances",), 1e-12, positive=True)
    cap = col.number(tol, "hp_degree_cap", ("tolerances",), 24, positive=True, integer=True)

    grid = data.get("grid", {}) or {}
    if not isinstance(grid, dict):
        col.add(("grid",), "expected a mapping")
        grid = {}
    for k in grid:
        if k not in _GRID:
            col.add(("grid", k), "unknown key")
    eq_grid = col.number(grid, "equilibrium", ("grid",), 256, positive=True, integer=True)
    sz_grid = col.number(grid, "szego", ("grid",), 256, positive=True, integer=True)
    max_degree = col.number(data, "max_degree", (), 8, positive=True, integer=True)

    pts = data.get("test_points")
    if pts is not None:
        if not isinstance(pts, list) or not pts:
            col.add(("test_points",), "need a nonempty list")
            pts = None
        else:
            parsed = []
            for i, v in enumerate(pts):
                try:
                    parsed.append(_complex(v))
                except (TypeError, ValueError):
                    col.add(("test_points", i), f"not a complex number: {v!r}")
            pts = tuple(parsed)

    name = str(data.get("name", Path(source).stem if source else "run"))
    out = str(data.get("output", "out"))
    if col.errors:
        raise ConfigError(col.errors)
    cfg = RunConfig(tuple(g for _, g in gens), tuple(ray), tuple(k_list), name, tol_eq, tol_fp,
                    cap, eq_grid, sz_grid, max_degree, pts, out, source)
    for k in cfg.k_list:
        if any(abs(k * p - round(k * p)) > 1e-9 for p in cfg.ray):
            raise ConfigError([f"line {col.lines.get(('k_list',), '?')}: k_list: "
                               f"k={k} times ray {list(cfg.ray)} is not integral"])
    return cfg


def parse_config(path):
    """Read and validate a YAML run configuration (or a bundled demo name)."""
    p = str(path)
    if p in DEMOS:
        text = demo_path(p).read_text()
        return parse_text(text, p)
    try:
        text = Path(p).read_text()
    except OSError as exc:
        raise ConfigError([f"{p}: cannot read: {exc.strerror}"], kind="io-error") from exc
    return parse_text(text, p)
