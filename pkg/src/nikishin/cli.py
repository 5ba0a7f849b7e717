"""Command line entry point: ``nikishin <command> --config <yaml|demo>``.

Exit codes: 0 all gates passed, 1 a gate failed, 2 usage or invalid input,
3 configuration error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    CHECKS,
    biorthogonal_crosscheck,
    biorthogonal_family,
    biorthogonality_residuals,
    convergence_sweep,
    default_test_points,
    deviation_series,
    eventually_decreasing,
    ray_indices,
)
from .config import DEMOS, parse_config
from .equilibrium import equilibrium_residual, solve_vector_equilibrium
from .errors import ConfigError, InvalidInputError, NikishinError
from .hermitepade import (
    apply_Tn,
    formrec_points,
    formrec_residual,
    hp_solve,
    laurent_coefficients,
    orthogonality_residual,
    tn_distance,
)
from .szego import SzegoWeightVector, boundcond_residual, contraction_constant, fixed_point_T

COMMANDS = ("equilibrium", "szego-fixed-point", "hp-solve", "verify", "biorthogonal", "all")

SWEEP_COLUMNS = ("check", "m", "p", "k", "n_abs", "j", "re_z", "im_z", "lhs_re", "lhs_im",
                 "rhs_re", "rhs_im", "abs_dev", "rel_dev")


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


class Gates:
    """Collects named numeric gates; every gate is printed when recorded."""

    def __init__(self, out=None):
        self.items = []
        self.out = out

    def check(self, name, value, limit, ok=None):
        ok = (value <= limit) if ok is None else ok
        ok = bool(ok) and not (isinstance(value, float) and math.isnan(value))
        self.items.append((name, value, limit, ok))
        print(f"gate {name}: {fmt(value)} (limit {fmt(limit)}) {'PASS' if ok else 'FAIL'}",
              file=self.out or sys.stdout)
        return ok

    @property
    def ok(self):
        return all(i[3] for i in self.items)


def _ray_str(p):
    return "/".join(format(v, ".6g") for v in p)


def cmd_equilibrium(cfg, out, gates):
    eq = solve_vector_equilibrium([g.interval for g in cfg.generators], cfg.ray_spec(),
                                  tol=cfg.tol_eq, n_points=cfg.eq_grid)
    rows = []
    for j, d in enumerate(eq.densities, 1):
        for x, u in zip(d.nodes, d.u):
            rows.append((j, x, u, float(d.density(x))))
    write_csv(out / "equilibrium_densities.csv", ("j", "x", "u", "density"), rows)
    res = equilibrium_residual(eq)
    write_csv(out / "equilibrium_constants.csv", ("j", "omega", "C", "mass"),
              [(j, eq.robin_constants[j - 1], eq.C[j - 1], eq.densities[j - 1].mass)
               for j in range(1, eq.m + 1)])
    write_csv(out / "equilibrium_sweeps.csv", ("sweep", "change"),
              list(enumerate(eq.iteration_report, 1)))
    gates.check("equilibrium_residual", res, 1e-6)
    gates.check("equilibrium_mass_error",
                max(abs(d.mass - 1.0) for d in eq.densities), 1e-10)
    if eq.m == 1:
        a, b = cfg.generators[0].interval
        gates.check("omega_vs_log4_over_length", abs(eq.robin_constants[0] - math.log(4 / (b - a))),
                    1e-10)
    return eq


def cmd_szego(cfg, out, gates, system=None):
    system = system or cfg.system()
    w = SzegoWeightVector.from_system(system, cfg.szego_grid)
    G = fixed_point_T(w, tol=cfg.tol_fp)
    write_csv(out / "fixed_point_log.csv", ("iteration", "distance"),
              list(enumerate(G.distances, 1)))
    res = boundcond_residual(G, system)
    write_csv(out / "fixed_point_summary.csv", ("j", "G_at_infinity"),
              [(j, G[j].at_infinity) for j in range(1, system.m + 1)])
    gates.check("boundcond_residual", res, 1e-8)
    if system.m > 1:
        gamma = float(contraction_constant(system.m))
        mbar = _mbar(system.m)
        d = list(G.distances)
        # same additive round-off allowance as the pairwise contraction bound
        excess = max((d[i + mbar] - gamma * d[i] for i in range(len(d) - mbar)), default=0.0)
        gates.check("contraction_excess_per_mbar_steps", max(excess, 0.0), 1e-12)
    return G


def _mbar(m):
    return math.ceil(m / 2)


def cmd_hp(cfg, out, gates, system=None):
    system = system or cfg.system()
    idx = ray_indices(cfg.ray_spec(), cfg.k_list)
    root_rows, res_rows = [], []
    worst = {"orthogonality": 0.0, "formrec": 0.0, "laurent": 0.0, "tn_relative": 0.0}
    for k, n in zip(cfg.k_list, idx):
        sol = hp_solve(system, n, degree_cap=cfg.degree_cap)
        tn = tn_distance(system, apply_Tn(system, sol.multi_index, sol.Q), sol.Q, relative=True)
        worst["tn_relative"] = max(worst["tn_relative"], tn)
        for j in range(1, system.m + 1):
            for i, r in enumerate(sol.Qj(j).roots):
                root_rows.append((k, _ray_str(n), j, i, r))
        for j in range(system.m):
            orth = orthogonality_residual(sol, j)
            fr = float(np.max(formrec_residual(sol, j, formrec_points(system, j))))
            van, lead = laurent_coefficients(sol, j)
            lv = float(np.max(np.abs(van), initial=0.0))
            worst["orthogonality"] = max(worst["orthogonality"], orth)
            worst["formrec"] = max(worst["formrec"], fr)
            worst["laurent"] = max(worst["laurent"], lv)
            res_rows.append((k, _ray_str(n), j, orth, fr, lv, lead, sol.K[j], sol.kappa[j + 1],
                             int(sol.eps[j + 1]), tn, len(sol.tn_distances)))
    write_csv(out / "hp_roots.csv", ("k", "n", "j", "i", "root"), root_rows)
    write_csv(out / "hp_residuals.csv",
              ("k", "n", "j", "orthogonality", "formrec", "laurent_vanishing", "laurent_leading",
               "K_j", "kappa_j_plus_1", "eps_j_plus_1", "tn_relative", "iterations"), res_rows)
    gates.check("orthogonality_residual", worst["orthogonality"], 1e-8)
    gates.check("formrec_residual", worst["formrec"], 1e-8)
    gates.check("laurent_vanishing", worst["laurent"], 1e-8)
    gates.check("tn_fixed_point_relative", worst["tn_relative"], 1e-6)


def cmd_verify(cfg, out, gates, system=None, eq=None, G=None):
    system = system or cfg.system()
    pts = np.array(cfg.test_points, complex) if cfg.test_points else default_test_points(system)
    rows = convergence_sweep(system, cfg.ray_spec(), cfg.k_list, pts, eq=eq, G=G,
                             hp_kw={"degree_cap": cfg.degree_cap}, tol_eq=cfg.tol_eq,
                             tol_fp=cfg.tol_fp)
    p = _ray_str(cfg.ray)
    body = []
    for r in rows:
        body.append((r.check, system.m, p, r.k, sum(r.multi_index), r.j, r.z.real, r.z.imag,
                     r.lhs.real, r.lhs.imag, r.rhs.real, r.rhs.imag, r.abs_dev, r.rel_dev))
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, body)
    summary = []
    for check in CHECKS:
        ks, devs = deviation_series(rows, check)
        if not ks:
            continue
        summary += [(check, k, d) for k, d in zip(ks, devs)]
        gates.check(f"{check}_eventually_decreasing", 0.0 if eventually_decreasing(devs) else 1.0,
                    0.0)
        gates.check(f"{check}_final_rel_dev", devs[-1], 0.1)
    write_csv(out / "sweep_summary.csv", ("check", "k", "max_rel_dev"), summary)


def cmd_bio(cfg, out, gates, system=None):
    system = system or cfg.system()
    if system.m < 2:
        raise InvalidInputError("biorthogonal polynomials need m >= 2")
    nmax = cfg.max_degree
    fam = biorthogonal_family(system, nmax)
    res = biorthogonality_residuals(system, nmax)
    rows = []
    worst_gap = 0.0
    for n in range(1, nmax + 1):
        gq, gp = biorthogonal_crosscheck(system, n, fam[n], degree_cap=cfg.degree_cap)
        worst_gap = max(worst_gap, gq, gp)
        rows.append((n, fam[n].C, res[n - 1], gq, gp))
    write_csv(out / "biorthogonal.csv", ("n", "C_n", "biorthogonality", "Q_vs_ml", "P_vs_ml_reversed"),
              rows)
    gates.check("biorthogonality_residual", max(res), 1e-9)
    gates.check("biorthogonal_vs_ml_coefficients", worst_gap, 1e-8)


def run_command(cfg, command, out_dir=None):
    """Run one command; returns (exit code, Gates)."""
    if command not in COMMANDS:
        raise InvalidInputError(f"unknown command {command!r}")
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gates = Gates()
    t0 = time.time()
    if command == "equilibrium":
        cmd_equilibrium(cfg, out, gates)
    elif command == "szego-fixed-point":
        cmd_szego(cfg, out, gates)
    elif command == "hp-solve":
        cmd_hp(cfg, out, gates)
    elif command == "verify":
        cmd_verify(cfg, out, gates)
    elif command == "biorthogonal":
        cmd_bio(cfg, out, gates)
    else:
        system = cfg.system()
        eq = cmd_equilibrium(cfg, out, gates)
        G = cmd_szego(cfg, out, gates, system)
        cmd_hp(cfg, out, gates, system)
        cmd_verify(cfg, out, gates, system, eq, G)
        if system.m >= 2:
            cmd_bio(cfg, out, gates, system)
    meta = {
        "command": command,
        "config": cfg.source,
        "name": cfg.name,
        "version": __version__,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime(t0)),
        "seconds": round(time.time() - t0, 3),
        "gates": [{"name": n, "value": v, "limit": lim, "pass": ok} for n, v, lim, ok in gates.items],
    }
    with open(out / "metadata.json", "w") as fh:
        json.dump(meta, fh, indent=2, default=float)
    return (0 if gates.ok else 1), gates


def _points(text):
    try:
        return tuple(complex(s.strip().replace(" ", "").replace("i", "j"))
                     for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad complex list {text!r}") from exc


def build_parser():
    ap = argparse.ArgumentParser(prog="nikishin", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True,
                    help=f"YAML file or bundled demo ({', '.join(DEMOS)})")
    ap.add_argument("--out", help="output directory (overrides the config)")
    ap.add_argument("--tol-eq", type=float)
    ap.add_argument("--tol-fp", type=float)
    ap.add_argument("--grid", type=int, help="grid size for equilibrium and Szego solvers")
    ap.add_argument("--max-degree", type=int, help="largest biorthogonal degree")
    ap.add_argument("--points", type=_points, help="comma-separated complex test points, e.g. 4+1j,1.5")
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = parse_config(args.config)
        cfg = cfg.with_overrides(tol_eq=args.tol_eq, tol_fp=args.tol_fp, eq_grid=args.grid,
                                 szego_grid=args.grid, max_degree=args.max_degree,
                                 test_points=args.points, out_dir=args.out)
        code, _ = run_command(cfg, args.command)
        return code
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return exc.exit_code
    except NikishinError as exc:
        print(f"{exc.kind}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
