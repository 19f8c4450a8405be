"""Embed, attack and extract over the dataset; prints dataset-mean BER per attack.

Pixel loss runs at alpha 0.02, JPEG at the strength the reference PSNR
curve gives for 33 dB, brightness and auto-adjust at alpha 0.06.
"""

import argparse
from pathlib import Path

from lapmark.harness import dataset_means, run_attack_suite

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--dataset", default="data/images")
parser.add_argument("--repeats", type=int, default=40)
parser.add_argument("--seed", type=int, default=8)
parser.add_argument("--workers", type=int, default=1)
parser.add_argument("--outdir", default="results")
args = parser.parse_args()

suites = {
    "pixel_loss": ("0.02", "pixel-loss:0.1,0.2,0.3,0.4,0.5,0.6,0.7"),
    "jpeg": ("ref-psnr:33", "jpeg:75,85,95"),
    "editing": ("0.06", "brightness:0.7,0.9,1.1,1.2; auto-adjust"),
}
Path(args.outdir).mkdir(parents=True, exist_ok=True)
for name, (strength, grid) in suites.items():
    rep = run_attack_suite(args.dataset, strength, 8000, grid, seed=args.seed, repeats=args.repeats,
                           workers=args.workers)
    rep.write(Path(args.outdir) / f"attacks_{name}.csv")
    print(f"-- {name} (strength {strength})")
    for label, value in sorted(dataset_means(rep, "ber").items()):
        print(f"   {label:18s} BER {100 * value:5.1f}%")
    for e in rep.errors:
        print("   error:", e)
