"""Contraction of T_w on random boundary vectors: worst ratio
d(T^mbar f, T^mbar g) / d(f, g) against gamma_m, for m = 2..5.

    python scripts/contraction_demo.py [trials]
"""
import sys
from math import ceil

import numpy as np

from nikishin.measures import MeasureSpec, NikishinSystem
from nikishin.szego import (BoundaryVectorFunction, SzegoWeightVector, apply_T,
                            contraction_constant, metric_d)


def chain(m):
    return NikishinSystem([MeasureSpec((3.0 * i, 3.0 * i + 2.0), -0.5, -0.5) for i in range(m)])


def random_vector(w, rng):
    # smooth positive data: low-degree random polynomials in the log
    def fun(j, k, x):
        c = rng.normal(size=4)
        t = (x - x.mean()) / np.ptp(x)
        return np.polynomial.polynomial.polyval(t, c)
    return BoundaryVectorFunction.from_logs(w.grids, fun)


def main(trials=20):
    rng = np.random.default_rng(7)
    for m in range(2, 6):
        w = SzegoWeightVector.from_system(chain(m), 64)
        gamma, mbar = float(contraction_constant(m)), ceil(m / 2)
        worst = 0.0
        for _ in range(int(trials)):
            f, g = random_vector(w, rng), random_vector(w, rng)
            d0 = metric_d(f, g)
            for _ in range(mbar):
                f, g = apply_T(w, f), apply_T(w, g)
            worst = max(worst, metric_d(f, g) / d0)
        print(f"m={m}  mbar={mbar}  gamma={gamma:.3f}  worst ratio={worst:.4f}")


if __name__ == "__main__":
    main(*sys.argv[1:])
