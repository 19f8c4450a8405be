"""Command-line entry point.

Exit status: 0 on success, 1 on a fatal error, 2 when a sweep finished but
some of its cells failed. Every option can also be given in a ``--config``
file of ``key = value`` lines; explicit flags win.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness
from .attacks import AttackSpec, KINDS
from .core import DEFAULT_MASK, WatermarkKey, as_bits, bits_from_hex, bits_to_hex
from .decoder import extract_traces
from .embedder import embed_image
from .imageio import list_images, read_image, write_image
from .metrics import REPORT_CSV_HEADER, report_row
from .statmodel import FIT_CSV_HEADER, fit_report
from .transform import forward_block_dct, gather_midband

MODEL_ALIASES = {
    "clean": "laplace-clean",
    "noisy": "laplace-noisy",
    "gauss": "gaussian",
    "laplace-clean": "laplace-clean",
    "laplace-noisy": "laplace-noisy",
    "gaussian": "gaussian",
}

# final defaults, applied after the config file
DEFAULTS = {
    "seed": 0,
    "domain": "pixel",
    "model": "clean",
    "workers": 1,
    "mode": "synthetic",
    "trials": 200000,
    "models": "laplace-noisy,gaussian",
    "snr": "0,2,4,6,8,10",
    "alphas": "0.01,0.02",
    "n_values": "8000",
    "n": 8000,
    "repeats": 1,
    "ber_domain": "dct",
    "attacks": "jpeg:75,85,95; brightness:0.7,0.9,1.1,1.2; auto-adjust",
    "strength": "0.06",
}


class PartialFailure(Exception):
    pass


def _write_text(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def _read_payload(spec: str) -> np.ndarray:
    p = Path(spec)
    if p.is_file():
        spec = p.read_text(encoding="utf-8").strip()
    return bits_from_hex(spec)


def cmd_keygen(a):
    key = WatermarkKey(int(a.seed), float(a.alpha), int(a.n))
    key.save(a.out) if a.out else print(key.to_line())


def cmd_embed(a):
    cover = read_image(a.cover)
    key = WatermarkKey.load(a.key)
    bits = _read_payload(a.bits)
    res = embed_image(cover, bits, key)
    write_image(a.out, res.watermarked)
    name = Path(a.cover).stem
    rows = [
        report_row("psnr", name, key.alpha, key.chips_per_bit, "", res.achieved_psnr),
        report_row("dwr", name, key.alpha, key.chips_per_bit, "", res.achieved_dwr),
        report_row("bits", name, key.alpha, key.chips_per_bit, "", res.bits_embedded),
    ]
    if a.report:
        _write_text(a.report, REPORT_CSV_HEADER + "\n" + "\n".join(rows) + "\n")


def cmd_extract(a):
    image = read_image(a.image)
    key = WatermarkKey.load(a.key)
    model = MODEL_ALIASES[a.model]
    traces = extract_traces(image, key, int(a.bits), a.noise_scale, model)
    bits = as_bits([t.bit for t in traces])
    text = bits_to_hex(bits) + "\n"
    _write_text(a.out, text)
    if a.trace:
        lines = ["index,statistic,threshold,bit,fallback"]
        lines += [f"{i},{t.statistic!r},{t.threshold!r},{t.bit},{int(t.fallback)}" for i, t in enumerate(traces)]
        _write_text(a.trace, "\n".join(lines) + "\n")


def cmd_attack(a):
    image = read_image(a.input)
    if a.no_noise:
        if a.kind != "laplace-noise":
            raise ValueError("--no-noise only applies to --kind laplace-noise")
        param = float("inf")
    else:
        param = None if a.param is None else float(a.param)
    spec = AttackSpec(a.kind, param, int(a.seed), a.domain)
    write_image(a.out, spec.apply(image))


def cmd_fit(a):
    paths = []
    for item in a.images:
        p = Path(item)
        paths += list_images(p) if p.is_dir() else [p]
    lines, failed = [FIT_CSV_HEADER], 0
    for p in paths:
        try:
            img = read_image(p)
            h, w = img.shape
            region = img[: h - h % 4, : w - w % 4]
            coeffs = gather_midband(forward_block_dct(region), DEFAULT_MASK)
            lines.append(fit_report(coeffs).csv_row(p.stem))
        except Exception as exc:
            print(f"{p}: {exc}", file=sys.stderr)
            failed += 1
    _write_text(a.out, "\n".join(lines) + "\n")
    if failed:
        raise PartialFailure(f"{failed} image(s) failed")


def _finish(report: harness.Report, out):
    _write_text(out, report.to_csv())
    for e in report.errors:
        print(e, file=sys.stderr)
    if report.errors:
        raise PartialFailure(f"{len(report.errors)} cell(s) failed")


def cmd_sweep_transparency(a):
    report = harness.run_transparency_sweep(
        a.dataset, harness.float_list(a.alphas), harness.int_list(a.n_values), int(a.seed), workers=int(a.workers))
    _finish(report, a.out)


def cmd_sweep_ber(a):
    ref = read_image(a.reference) if a.reference else None
    report = harness.run_ber_sweep(
        a.mode, harness.float_list(a.snr), harness.float_list(a.alphas), harness.int_list(a.n_values),
        int(a.trials), tuple(MODEL_ALIASES[m.strip()] for m in a.models.split(",") if m.strip()),
        seed=int(a.seed), reference_image=ref, dataset=a.dataset, domain=a.ber_domain, workers=int(a.workers))
    _finish(report, a.out)


def cmd_sweep_attacks(a):
    strength, n, seed, mask = a.strength, int(a.n), int(a.seed), DEFAULT_MASK
    if a.key:
        key = WatermarkKey.load(a.key)
        strength, n, seed, mask = str(key.alpha), key.chips_per_bit, key.seed, key.midband_mask
    report = harness.run_attack_suite(a.dataset, strength, n, a.attacks, seed=seed, repeats=int(a.repeats),
                                      mask=mask, workers=int(a.workers))
    _finish(report, a.out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lapmark", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key = value file supplying defaults")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("keygen", help="write a key file")
    s.add_argument("--seed")
    s.add_argument("--alpha", required=True)
    s.add_argument("--n", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_keygen)

    s = sub.add_parser("embed", help="embed a payload into a cover image")
    s.add_argument("--cover", required=True)
    s.add_argument("--key", required=True)
    s.add_argument("--bits", required=True, help="hex string, bin:-prefixed binary string, or a file holding one")
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("extract", help="blindly decode a payload")
    s.add_argument("--image", required=True)
    s.add_argument("--key", required=True)
    s.add_argument("--bits", required=True, help="number of payload bits")
    s.add_argument("--model", choices=sorted(MODEL_ALIASES))
    s.add_argument("--noise-scale", type=float)
    s.add_argument("--out", help="file for the hex payload (default: stdout)")
    s.add_argument("--trace", help="CSV file for per-bit decision traces")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("attack", help="apply one attack to an image")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--kind", required=True, choices=KINDS)
    s.add_argument("--param")
    s.add_argument("--no-noise", action="store_true", help="infinite SNR: pass the image through")
    s.add_argument("--seed")
    s.add_argument("--domain", choices=("pixel", "dct"))
    s.set_defaults(func=cmd_attack)

    s = sub.add_parser("fit", help="Laplacian fit of mid-band coefficients")
    s.add_argument("images", nargs="+", help="image files or directories")
    s.add_argument("--out")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("sweep-transparency", help="PSNR/DWR over a dataset")
    s.add_argument("--dataset", required=False)
    s.add_argument("--alphas")
    s.add_argument("--n-values")
    s.add_argument("--seed")
    s.add_argument("--workers")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep_transparency)

    s = sub.add_parser("sweep-ber", help="bit error rate against SNR")
    s.add_argument("--mode", choices=("synthetic", "image"))
    s.add_argument("--snr")
    s.add_argument("--alphas")
    s.add_argument("--n-values")
    s.add_argument("--trials")
    s.add_argument("--models")
    s.add_argument("--reference", help="image whose coefficient scale sets the synthetic host")
    s.add_argument("--dataset")
    s.add_argument("--ber-domain", choices=("pixel", "dct"), help="noise injection domain in image mode")
    s.add_argument("--seed")
    s.add_argument("--workers")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep_ber)

    s = sub.add_parser("sweep-attacks", help="embed, attack and extract over a dataset")
    s.add_argument("--dataset")
    s.add_argument("--key", help="key file; overrides --strength, --n and --seed")
    s.add_argument("--strength", help="alpha, psnr:<dB> or ref-psnr:<dB>")
    s.add_argument("--n")
    s.add_argument("--attacks", help="e.g. 'jpeg:75,85,95; brightness:0.7,1.2; auto-adjust'")
    s.add_argument("--repeats")
    s.add_argument("--seed")
    s.add_argument("--workers")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep_attacks)
    return p


def _merge(args, config: dict[str, str]):
    for name, value in config.items():
        if getattr(args, name, None) is None and hasattr(args, name):
            setattr(args, name, value)
    for name, value in DEFAULTS.items():
        if hasattr(args, name) and getattr(args, name) is None:
            setattr(args, name, value)
    if getattr(args, "dataset", "") is None and args.command.startswith("sweep") and args.command != "sweep-ber":
        raise ValueError("--dataset is required")
    return args


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = harness.load_config(args.config) if args.config else {}
        args = _merge(args, config)
        args.func(args)
    except PartialFailure as exc:
        print(f"lapmark: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"lapmark: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
