"""Max relative deviation per k for every asymptotic check along a demo ray,
plus the observed vs predicted geometric rate of the approximation error.

    python scripts/convergence_table.py m2-jacobi
"""
import sys

import numpy as np

from nikishin.asymptotics import (CHECKS, approximation_error, convergence_sweep,
                                  deviation_series, observed_rate, predicted_rate, ray_indices)
from nikishin.config import parse_config
from nikishin.equilibrium import solve_vector_equilibrium
from nikishin.hermitepade import hp_solve


def main(name="m2-jacobi"):
    cfg = parse_config(name)
    system, ray = cfg.system(), cfg.ray_spec()
    rows = convergence_sweep(system, ray, cfg.k_list)
    table = {c: dict(zip(*deviation_series(rows, c))) for c in CHECKS}
    print(f"{cfg.name}: m={system.m}, ray={list(cfg.ray)}")
    print("  k " + "".join(f"{c:>12s}" for c in CHECKS))
    for k in cfg.k_list:
        print(f"{k:3d} " + "".join(f"{table[c].get(k, np.nan):12.3e}" for c in CHECKS))

    # error of the last form at a point right of the hull decays like predicted_rate**k
    eq = solve_vector_equilibrium(system.intervals, ray)
    z = complex(system.intervals[-1].b + 1.0, 0.5)
    ks = cfg.k_list
    errs = [abs(approximation_error(hp_solve(system, n), system.m - 1, z))
            for n in ray_indices(ray, ks)]
    print(f"rate at z={z}: observed {observed_rate(ks, errs):.4f}, "
          f"predicted {predicted_rate(eq, z):.4f}")


if __name__ == "__main__":
    main(*sys.argv[1:])
