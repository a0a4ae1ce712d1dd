"""Run every reproduction recipe into results/ at desk scale.

Usage: python scripts/run_figures.py [--seed N] [--outdir DIR] [--full-scale]
Desk-scale runs finish in minutes; --full-scale restores the large grids and
the 5e6-point quantum sample (hours).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from nonsig.cli import dispatch

RECIPES = ["fig3", "fig4", "fig5", "fig6", "fig7"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--outdir", type=Path, default=Path("results"))
    parser.add_argument("--full-scale", action="store_true")
    parser.add_argument("--only", choices=RECIPES, default=None)
    args = parser.parse_args()

    recipes = [args.only] if args.only else RECIPES
    worst = 0
    for recipe in recipes:
        argv = ["repro", recipe, "--seed", str(args.seed), "--outdir", str(args.outdir / recipe)]
        if args.full_scale:
            argv.append("--full-scale")
        t0 = time.time()
        rc = dispatch(argv)
        print(f"{recipe}: exit {rc} in {time.time() - t0:.0f}s -> {args.outdir / recipe}")
        worst = max(worst, rc)
    return worst


if __name__ == "__main__":
    sys.exit(main())
