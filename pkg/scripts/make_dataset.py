"""Write the bundled standard test images as 8-bit PGM files."""

import argparse

from lapmark.datasets import STANDARD_IMAGES, build_standard_dataset

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--out", default="data/images")
parser.add_argument("--names", nargs="*", default=None, choices=sorted(STANDARD_IMAGES))
args = parser.parse_args()

written = build_standard_dataset(args.out, args.names)
for name, path in written.items():
    print(f"{name}: {path}")
missing = set(args.names or STANDARD_IMAGES) - set(written)
if missing:
    print("skipped (source package not installed):", ", ".join(sorted(missing)))
