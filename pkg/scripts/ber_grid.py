"""Synthetic BER over a grid of segment lengths and strengths at fixed SNR."""

import argparse
from pathlib import Path

from lapmark.harness import run_ber_sweep

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--snr", type=float, nargs="+", default=[-4, -2, 0])
parser.add_argument("--alphas", type=float, nargs="+", default=[0.02, 0.04, 0.06])
parser.add_argument("--n-values", type=int, nargs="+", default=[2000, 4000, 8000, 10000])
parser.add_argument("--trials", type=int, default=5000)
parser.add_argument("--workers", type=int, default=1)
parser.add_argument("--seed", type=int, default=6)
parser.add_argument("--out", default="results/ber_grid.csv")
args = parser.parse_args()

rep = run_ber_sweep("synthetic", args.snr, args.alphas, args.n_values, args.trials, ("laplace-noisy",),
                    seed=args.seed, workers=args.workers)
Path(args.out).parent.mkdir(parents=True, exist_ok=True)
rep.write(args.out)
for row in rep.rows:
    print(f"alpha={row[2]:<5g} N={row[3]:<6d} {row[4]:8s} BER {row[5]:.3e}")
