"""Singlets spent per prepared pair with and without compressing before teleportation."""
from __future__ import annotations

import argparse
import math

import numpy as np

from entconc.dilution import interconversion_ratio, prepare_entangled_compressed
from entconc.qcore import binary_entropy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cos2", type=float, default=0.9)
    ap.add_argument("--delta", type=float, default=0.25)
    ap.add_argument("--n", type=int, nargs="+", default=[4, 8, 10, 64, 256, 1024, 4096])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    theta = math.acos(math.sqrt(args.cos2))
    h = binary_entropy(args.cos2)
    print(f"cos2={args.cos2}: H={h:.4f}, H+delta={h + args.delta:.4f}, uncompressed cost 1 singlet per pair")
    print(f"{'n':>5} {'singlets':>9} {'per pair':>9} {'log2 dim/n':>11} {'fidelity':>9} {'checked':>8}")
    for n in args.n:
        r = prepare_entangled_compressed(theta, n, args.delta, np.random.default_rng([args.seed, n]))
        checked = "dense" if r.dense_fidelity is not None else "-"
        print(f"{n:5d} {r.ledger.singlets_consumed:9d} {r.ledger.singlets_consumed / n:9.4f} "
              f"{r.log2_retained_dim / n:11.4f} {r.fidelity:9.5f} {checked:>8}")

    print("\nconcentrate pi/6 pairs then dilute into pi/3 pairs (equal entanglement):")
    for n in (16, 64, 256, 1024, 4096):
        eps = delta = n**-0.5
        print(f"  n={n:5d}  target pairs per source pair {interconversion_ratio(math.pi / 6, math.pi / 3, n, delta, eps):.4f}")


if __name__ == "__main__":
    main()
