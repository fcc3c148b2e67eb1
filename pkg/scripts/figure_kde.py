"""Kernel density curves of selector-minus-oracle differences.

    python scripts/figure_kde.py out/tables

For every ``figure_*.csv`` in the directory, writes ``kde_<name>.csv`` with
one density column per difference series on a common grid, and prints the
sample standard deviations (derivative series spread wider than regression).
"""
import argparse
from pathlib import Path

import numpy as np

from locpoly import io
from locpoly.density import kde, silverman_bandwidth


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir")
    ap.add_argument("--grid-points", type=int, default=512)
    args = ap.parse_args()
    out = Path(args.out_dir)
    for path in sorted(out.glob("figure_*.csv")):
        cols = io.read_columns(path)
        if not all(v.size > 1 for v in cols.values()):
            continue
        h = {k: silverman_bandwidth(v) for k, v in cols.items()}
        lo = min(v.min() - 4 * h[k] for k, v in cols.items())
        hi = max(v.max() + 4 * h[k] for k, v in cols.items())
        grid = np.linspace(lo, hi, args.grid_points)
        dens = {"grid": grid}
        dens.update({k: kde(v, grid, h[k]).values for k, v in cols.items()})
        io.write_columns(out / f"kde_{path.stem}.csv", dens)
        sds = "  ".join(f"{k}={np.std(v, ddof=1):.4g}" for k, v in cols.items())
        print(f"{path.stem}: {sds}")


if __name__ == "__main__":
    main()
