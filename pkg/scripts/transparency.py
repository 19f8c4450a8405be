"""PSNR and DWR over the dataset for a grid of strengths and segment lengths.

The defaults give the alpha/N table at N = 8000 plus the DWR-versus-N curves.
"""

import argparse
from pathlib import Path

import numpy as np

from lapmark.harness import run_transparency_sweep

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--dataset", default="data/images")
parser.add_argument("--alphas", type=float, nargs="+", default=[0.005, 0.01, 0.02, 0.05])
parser.add_argument("--n-values", type=int, nargs="+", default=[1000, 2000, 4000, 6000, 8000, 10000])
parser.add_argument("--seed", type=int, default=1)
parser.add_argument("--out", default="results/transparency.csv")
args = parser.parse_args()

rep = run_transparency_sweep(args.dataset, args.alphas, args.n_values, args.seed)
Path(args.out).parent.mkdir(parents=True, exist_ok=True)
rep.write(args.out)

print(f"{'alpha':>7} {'N':>6} {'mean PSNR':>10} {'mean DWR':>9} {'-20log a':>9}")
for a in args.alphas:
    for n in args.n_values:
        p = rep.values("psnr", alpha=a, n=n)
        d = rep.values("dwr", alpha=a, n=n)
        if p:
            print(f"{a:7.3f} {n:6d} {np.mean(p):10.2f} {np.mean(d):9.2f} {-20 * np.log10(a):9.2f}")
for e in rep.errors:
    print("error:", e)
