"""Write the regression baselines in tests/fixtures from a validated sweep.

Run once after a change that is meant to move the numbers; the test suite
compares against these files at 1e-10.

    python scripts/freeze_fixtures.py
"""
import json
from pathlib import Path

from nikishin.asymptotics import CHECKS, convergence_sweep, deviation_series
from nikishin.config import parse_config

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures"

# (demo, k values): the m=2 rays cover the acceptance range k = 2..12
RUNS = {
    "m2-jacobi": [2, 4, 6, 8, 10, 12],
    "m2-lebesgue": [2, 4, 6, 8, 10, 12],
    "m3-chain": [3, 6, 9, 12],
}


def sweep_table(name, ks):
    cfg = parse_config(name)
    rows = convergence_sweep(cfg.system(), cfg.ray_spec(), ks)
    table = {}
    for check in CHECKS:
        for j in range(0, cfg.m + 1):
            kk, devs = deviation_series(rows, check, j)
            if kk:
                table[f"{check}/{j}"] = {"k": kk, "max_rel_dev": devs}
    return table


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, ks in RUNS.items():
        data = {"demo": name, "k": ks, "series": sweep_table(name, ks)}
        path = OUT / f"sweep_{name}.json"
        path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
        print("wrote", path)


if __name__ == "__main__":
    main()
