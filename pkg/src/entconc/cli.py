"""Command-line front end: yield curves and seeded protocol runs as CSV.

    entconc fig1 --out fig1.csv
    entconc concentrate --cos2 0.75 --n 8 --epsilon 0.1 --trials 200 --seed 1
    entconc qdc --theta 0.5236 --n 4 8 16 32 64 --delta 0.25
    entconc dilute --cos2 0.9 --n 10 --delta 0.25 --seed 3

Floats are written with ``repr`` so a fixed seed gives byte-identical output.
"""
from __future__ import annotations

import argparse
import csv
import io
import statistics
import sys

import numpy as np

from .config import ConcentrateConfig, DiluteConfig, Fig1Config, QDCConfig, theta_from
from .dilution import prepare_entangled_compressed
from .procrustean import expected_yield_cos2
from .qcore import binary_entropy
from .qdc import qdc_row
from .schmidt_projection import (
    PairEnsembleSpec,
    per_pair_yield,
    predicted_rate,
    read_k_sequence,
    run_full_protocol,
    standardize,
)

FIG1_COLUMNS = ["cos2theta", "method", "yield_per_pair"]
CONCENTRATE_COLUMNS = ["seed", "theta", "n", "epsilon", "m", "ell", "pairs_consumed", "status",
                       "trial", "yield_rate", "predicted_rate"]
QDC_COLUMNS = ["theta", "n", "delta", "retained_dim", "retained_mass", "fidelity",
               "max_ent_fidelity", "overlap"]
DILUTE_COLUMNS = ["theta", "n", "delta", "singlets", "cbits", "fidelity", "seed", "trial",
                  "outcome", "log2_retained_dim"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def _table(columns: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream per (seed, trial), so results don't depend on trial order."""
    return np.random.default_rng([seed, trial])


def fig1_rows(cfg: Fig1Config) -> list:
    rows = []
    for x in cfg.grid():
        rows.append({"cos2theta": x, "method": "asymptotic", "yield_per_pair": binary_entropy(x)})
        for n in cfg.n_list:
            rows.append({"cos2theta": x, "method": f"schmidt({n})",
                         "yield_per_pair": per_pair_yield(x, n)})
        rows.append({"cos2theta": x, "method": "procrustean",
                     "yield_per_pair": expected_yield_cos2(x)})
    return rows


def concentrate_rows(cfg: ConcentrateConfig) -> list:
    spec = PairEnsembleSpec(cfg.theta, cfg.n)
    pred = predicted_rate(spec, cfg.epsilon)
    rows, rates = [], []
    for t in range(cfg.trials):
        res = run_full_protocol(spec, cfg.epsilon, cfg.batches, trial_rng(cfg.seed, t))
        rates.append(res.yield_rate)
        rows.append({"seed": cfg.seed, "theta": cfg.theta, "n": cfg.n, "epsilon": cfg.epsilon,
                     "m": res.run.steps, "ell": res.run.ell, "pairs_consumed": res.pairs_consumed,
                     "status": res.run.status, "trial": t, "yield_rate": res.yield_rate,
                     "predicted_rate": pred})
    rows.append({"seed": cfg.seed, "theta": cfg.theta, "n": cfg.n, "epsilon": cfg.epsilon,
                 "m": "", "ell": "", "pairs_consumed": sum(r["pairs_consumed"] for r in rows),
                 "status": "summary", "trial": "summary",
                 "yield_rate": float(statistics.fmean(rates)), "predicted_rate": pred})
    return rows


def replay_rows(cfg: ConcentrateConfig, k_values: list) -> list:
    """One standardization walk over a supplied k sequence; the final projection uses the seed."""
    run = standardize(k_values, cfg.n, cfg.epsilon, max_steps=len(k_values) or 1,
                      rng=trial_rng(cfg.seed, 0))
    rate = run.singlets / run.pairs_consumed if run.pairs_consumed else 0.0
    return [{"seed": cfg.seed, "theta": cfg.theta, "n": cfg.n, "epsilon": cfg.epsilon,
             "m": run.steps, "ell": run.ell, "pairs_consumed": run.pairs_consumed,
             "status": run.status, "trial": 0, "yield_rate": rate,
             "predicted_rate": predicted_rate(PairEnsembleSpec(cfg.theta, cfg.n), cfg.epsilon)}]


def qdc_rows(cfg: QDCConfig) -> list:
    out = []
    for n in cfg.n_list:
        r = qdc_row(cfg.theta, n, cfg.delta)
        out.append({c: getattr(r, c) for c in QDC_COLUMNS})
    return out


def dilute_rows(cfg: DiluteConfig) -> list:
    rows = []
    for n in cfg.n_list:
        for t in range(cfg.trials):
            r = prepare_entangled_compressed(cfg.theta, n, cfg.delta, trial_rng(cfg.seed, t),
                                             dense=cfg.dense)
            fid = r.dense_fidelity if r.dense_fidelity is not None else r.fidelity
            rows.append({"theta": cfg.theta, "n": n, "delta": cfg.delta,
                         "singlets": r.ledger.singlets_consumed,
                         "cbits": r.ledger.classical_bits_sent, "fidelity": float(fid),
                         "seed": cfg.seed, "trial": t, "outcome": r.outcome,
                         "log2_retained_dim": r.log2_retained_dim})
    return rows


def cmd_fig1(args) -> str:
    cfg = Fig1Config(grid_points=args.grid_points, n_list=tuple(args.n or (2, 4, 8, 32)))
    return _table(FIG1_COLUMNS, fig1_rows(cfg))


def cmd_concentrate(args) -> str:
    cfg = ConcentrateConfig(theta=theta_from(args.theta, args.cos2, 0.75), n=_single(args.n, 8),
                            epsilon=args.epsilon, batches=args.batches, trials=args.trials,
                            seed=args.seed)
    if args.k_file:
        try:
            ks = read_k_sequence(args.k_file)
        except OSError as exc:
            raise ValueError(f"cannot read {args.k_file}: {exc.strerror}") from None
        return _table(CONCENTRATE_COLUMNS, replay_rows(cfg, ks))
    return _table(CONCENTRATE_COLUMNS, concentrate_rows(cfg))


def cmd_qdc(args) -> str:
    cfg = QDCConfig(theta=theta_from(args.theta, args.cos2, 0.75),
                    n_list=tuple(args.n or (4, 8, 16, 32, 64)), delta=args.delta)
    return _table(QDC_COLUMNS, qdc_rows(cfg))


def cmd_dilute(args) -> str:
    cfg = DiluteConfig(theta=theta_from(args.theta, args.cos2, 0.9), n_list=tuple(args.n or (10,)),
                       delta=args.delta, trials=args.trials, seed=args.seed)
    return _table(DILUTE_COLUMNS, dilute_rows(cfg))


def _single(ns, default: int) -> int:
    if not ns:
        return default
    if len(ns) != 1:
        raise ValueError("this command takes a single --n")
    return ns[0]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entconc",
                                     description="Entanglement concentration, dilution and "
                                                 "compression experiments (CSV output).")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, epsilon=False, delta=False, trials=False):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--theta", type=float, help="pair angle in radians")
        g.add_argument("--cos2", type=float, help="cos^2(theta), the larger Schmidt weight")
        p.add_argument("--n", type=int, nargs="+", help="pairs per batch")
        if epsilon:
            p.add_argument("--epsilon", type=float, default=0.1, help="standardization tolerance")
            p.add_argument("--batches", type=int, default=1000, help="max batches per trial")
        if delta:
            p.add_argument("--delta", type=float, default=0.25, help="likely-subspace slack")
        if trials:
            p.add_argument("--trials", type=int, default=1)
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="-", help="output CSV path (default stdout)")

    p = sub.add_parser("fig1", help="yield per pair against cos^2(theta)")
    p.add_argument("--n", type=int, nargs="+", help="Schmidt-projection batch sizes")
    p.add_argument("--grid-points", type=int, default=99)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("concentrate", help="Monte Carlo Schmidt-projection runs")
    common(p, epsilon=True, trials=True)
    p.add_argument("--k-file", help="replay k values from a file, one per line")
    p.set_defaults(func=cmd_concentrate, trials=200)

    p = sub.add_parser("qdc", help="compression fidelity sweep over n")
    common(p, delta=True)
    p.set_defaults(func=cmd_qdc)

    p = sub.add_parser("dilute", help="compressed dilution by teleportation")
    common(p, delta=True, trials=True)
    p.set_defaults(func=cmd_dilute)
    return parser


def main(argv: list | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
    except ValueError as exc:
        print(f"entconc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    if args.out == "-":
        sys.stdout.write(text)
        return 0
    try:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"entconc {args.command}: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
