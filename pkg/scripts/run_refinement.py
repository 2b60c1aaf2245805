#!/usr/bin/env python3
"""Grid convergence and energy-budget closure on the smooth verification data.

Usage: python3 scripts/run_refinement.py [--levels 3] [--out DIR]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))

from poiseuille_lc.harness import parse_config, refinement_study

BASE = "\n".join(["preset = general", "x_min = -3.5", "x_max = 3.5",
                  "nx = 4097", "t_end = 0.5"])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--levels", type=int, default=3, help="nested grid count")
    parser.add_argument("--out", default="out/refinement", help="artifact root")
    args = parser.parse_args()

    config = parse_config(BASE, {"output_dir": args.out})
    study = refinement_study(config, levels=args.levels)
    for i, nx in enumerate(study.nx_levels):
        line = f"nx={nx:<7d} residual={study.budget_residual[i]:.4e}"
        if i >= 1:
            line += f" shrink={study.budget_shrink[i - 1]:.3f}"
        if i >= 2:
            line += (f" order(theta)={study.order_theta[i - 2]:.3f}"
                     f" order(u)={study.order_u[i - 2]:.3f}")
        print(line)
    print(f"artifacts under {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
