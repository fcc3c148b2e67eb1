"""Run the bias/MSE ratio experiment and print the ratio tables.

    python scripts/run_tables.py configs/tables.json out/tables

Writes the same files as ``locpoly montecarlo`` and prints one block per
(model, target, stat) with selectors as columns.
"""
import argparse
import csv
import subprocess
import sys
from collections import defaultdict
from pathlib import Path


def print_tables(ratios: Path) -> None:
    with open(ratios) as fh:
        rows = list(csv.DictReader(fh))
    blocks = defaultdict(dict)
    for r in rows:
        key = (r["model"], r["target"], r["stat"])
        cell = (float(r["rho"]), int(r["n"]), float(r["x0"]))
        blocks[key].setdefault(cell, {})[r["selector"]] = float(r["ratio"])
    for (model, target, stat), cells in blocks.items():
        print(f"\n{model}  {target}  {stat} ratio (vs h_AMISE)")
        print(f"{'rho':>5} {'n':>5} {'x0':>8} {'cv':>8} {'rot':>8}")
        for (rho, n, x0), v in sorted(cells.items()):
            print(f"{rho:5.1f} {n:5d} {x0:8.4f} {v['cv']:8.3f} {v['rot']:8.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("out_dir")
    ap.add_argument("--print-only", action="store_true", help="skip the run, print existing output")
    args = ap.parse_args()
    out = Path(args.out_dir)
    if not args.print_only:
        cmd = [sys.executable, "-m", "locpoly", "montecarlo", "--config", args.config, "--out-dir", str(out)]
        subprocess.run(cmd, check=True)
    print_tables(out / "ratios.csv")


if __name__ == "__main__":
    main()
