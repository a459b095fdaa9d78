"""Oracle-query scaling in m for the quantum and classical boosters (cost-model backend).

    python3 scripts/scaling_experiment.py [--out results/scaling] [--seeds 2]
"""
import argparse
import os

from qsmoothboost.harness import load_config
from qsmoothboost.harness.sweep import sweep, write_sweep

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/scaling")
    ap.add_argument("--seeds", type=int, default=2)
    args = ap.parse_args()
    base = load_config(os.path.join(HERE, "..", "configs", "scaling.cfg"))
    for booster in ("qsmoothboost", "smoothboost"):
        cfg = base.with_values(booster=booster, seeds=tuple(range(args.seeds)),
                               shortcut=booster == "qsmoothboost")
        res = sweep(cfg)
        write_sweep(res, os.path.join(args.out, booster))
        fit = res.fits["m"]
        print(f"{booster:>13}: queries ~ m^{fit.exponent:.3f} "
              f"(95% CI {fit.ci_low:.3f} .. {fit.ci_high:.3f})")
        for row in res.rows:
            print(f"    m={row['m']:>5} seed={row['seed']} T={row['T']:>4} "
                  f"queries={row['total_queries']}")


if __name__ == "__main__":
    main()
