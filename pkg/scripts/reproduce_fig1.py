"""Yield per input pair against cos^2(theta) for every concentration method.

Writes the long-format CSV and prints a coarse text table of a few grid points.
"""
from __future__ import annotations

import argparse

from entconc.cli import FIG1_COLUMNS, _table, fig1_rows
from entconc.config import Fig1Config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid-points", type=int, default=99)
    ap.add_argument("--out", default="fig1.csv")
    args = ap.parse_args()

    cfg = Fig1Config(grid_points=args.grid_points)
    rows = fig1_rows(cfg)
    with open(args.out, "w", newline="") as fh:
        fh.write(_table(FIG1_COLUMNS, rows))

    methods = ["asymptotic"] + [f"schmidt({n})" for n in cfg.n_list] + ["procrustean"]
    by_x: dict = {}
    for r in rows:
        by_x.setdefault(r["cos2theta"], {})[r["method"]] = r["yield_per_pair"]
    print("cos2   " + " ".join(f"{m:>12}" for m in methods))
    for x in sorted(by_x)[:: max(1, len(by_x) // 10)]:
        print(f"{x:.2f}   " + " ".join(f"{by_x[x][m]:12.5f}" for m in methods))
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
