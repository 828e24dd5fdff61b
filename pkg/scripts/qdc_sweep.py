"""Block compression fidelity, two-sided degradation and the Schmidt-coding collision over n."""
from __future__ import annotations

import argparse
import math

from entconc.qdc import qdc_row, schmidt_coding_counterexample, two_sided_compression_analysis


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--theta", type=float, default=math.pi / 6)
    ap.add_argument("--delta", type=float, nargs="+", default=[0.05, 0.1, 0.25])
    ap.add_argument("--n", type=int, nargs="+", default=[4, 8, 16, 32, 64, 128, 256])
    args = ap.parse_args()

    for delta in args.delta:
        print(f"\ntheta={args.theta:.6f} delta={delta}")
        print(f"{'n':>5} {'log2 dim':>9} {'mass':>9} {'fidelity':>9} {'max-ent F':>10} {'dispersion':>11}")
        for n in args.n:
            row = qdc_row(args.theta, n, delta)
            two = two_sided_compression_analysis(args.theta, n, delta)
            print(f"{n:5d} {math.log2(row.retained_dim):9.2f} {row.retained_mass:9.5f} {row.fidelity:9.5f} "
                  f"{row.max_ent_fidelity:10.5f} {two.dispersion:11.3e}")

    rep = schmidt_coding_counterexample(args.theta, "0110100111")
    print(f"\nx={rep.x} vs {rep.x_bar}: encodings differ by {rep.encoding_deviation:.1e}, "
          f"overlap {abs(rep.overlap):.3e}, decoding fidelity at most {rep.fidelity_ceiling:.6f}")


if __name__ == "__main__":
    main()
