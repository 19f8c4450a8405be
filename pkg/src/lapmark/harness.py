"""Batch experiments: transparency, bit-error sweeps and attack suites.

Each sweep is a list of independent cells. Cells may run in a process pool;
rows are sorted by cell key afterwards, so output never depends on
scheduling. All randomness is derived from explicit seeds.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import attacks, keystream, metrics
from .core import DEFAULT_MASK, WatermarkKey, validate_key
from .decoder import MODELS, extract_image
from .embedder import alpha_for_psnr, embed_image
from .imageio import list_images, read_image
from .montecarlo import SyntheticTrialConfig, run_synthetic
from .statmodel import mle_scale
from .transform import forward_block_dct, gather_midband

# PSNR of the reference transparency curve at alpha = 0.01; it falls 20 dB per decade of alpha
REFERENCE_PSNR_AT_001 = 45.04


def reference_alpha_for_psnr(psnr_db: float) -> float:
    return 0.01 * 10.0 ** ((REFERENCE_PSNR_AT_001 - psnr_db) / 20.0)


# -- config files ----------------------------------------------------------

def parse_config(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"config line {lineno}: expected key = value, got {raw!r}")
        out[key.strip().lower().replace("-", "_")] = value.strip()
    return out


def load_config(path) -> dict[str, str]:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def int_list(text: str) -> list[int]:
    return [int(v) for v in text.replace(";", ",").split(",") if v.strip()]


def parse_mask(text: str) -> tuple[tuple[int, int], ...]:
    return tuple(tuple(int(v) for v in item.split(",")) for item in text.split(";") if item.strip())


def parse_attack_grid(text: str) -> list[tuple[str, float | None]]:
    """``jpeg:75,85,95; brightness:0.7,1.1; auto-adjust`` -> (kind, param) cells."""
    cells = []
    for group in text.split(";"):
        group = group.strip()
        if not group:
            continue
        kind, _, params = group.partition(":")
        kind = kind.strip()
        if kind not in attacks.KINDS:
            raise ValueError(f"unknown attack kind {kind!r}")
        if params.strip():
            cells.extend((kind, p) for p in float_list(params))
        else:
            cells.append((kind, None))
    return cells


# -- reports ---------------------------------------------------------------

@dataclass
class Report:
    header: str
    rows: list[tuple] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def sort(self, key=None) -> "Report":
        # cell key first (image, alpha, n, param), then metric
        self.rows.sort(key=key or (lambda r: tuple(_sortable(v) for v in (*r[1:5], r[0]))))
        return self

    def to_csv(self) -> str:
        lines = [self.header]
        lines += [metrics.report_row(*r) if len(r) == 6 else ",".join(_fmt(v) for v in r) for r in self.rows]
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8", newline="\n")

    def values(self, metric: str, **match) -> list[float]:
        """Values of rows with this metric whose named columns equal ``match``."""
        cols = self.header.split(",")
        out = []
        for r in self.rows:
            row = dict(zip(cols, r))
            if row["metric"] == metric and all(row.get(k) == v for k, v in match.items()):
                out.append(float(row["value"]))
        return out


def _sortable(v):
    if v is None or v == "":
        return (0, 0.0, "")
    if isinstance(v, (int, float)):
        return (1, float(v), "")
    return (2, 0.0, str(v))


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def _clean(text: str) -> str:
    return str(text).replace(",", ";").replace("\n", " ")


def _map(fn, cells, workers: int):
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, cells))
    return [fn(c) for c in cells]


def load_dataset(dataset) -> list[tuple[str, object]]:
    """``(name, image-or-error)`` pairs from a directory, a path list or a mapping."""
    if isinstance(dataset, dict):
        items = list(dataset.items())
    else:
        paths = list_images(dataset) if Path(dataset).is_dir() else [Path(dataset)]
        items = [(p.stem, p) for p in paths]
    out = []
    for name, item in items:
        if isinstance(item, (str, Path)):
            try:
                item = read_image(item)
            except Exception as exc:  # unreadable files become row-level errors
                item = exc
        out.append((name, item))
    return sorted(out, key=lambda t: t[0])


def payload_bits(seed: int, nbits: int) -> np.ndarray:
    return (keystream.generate_chips(keystream.derive_seed(seed, 0xB175), nbits) > 0).astype(np.uint8)


# -- transparency ----------------------------------------------------------

def _transparency_cell(cell):
    name, img, alpha, n, seed, mask = cell
    key = WatermarkKey(seed, alpha, n, mask)
    nbits = validate_key(key, (img.shape[0] - img.shape[0] % 4, img.shape[1] - img.shape[1] % 4))
    res = embed_image(img, payload_bits(seed, nbits), key)
    return [
        ("psnr", name, alpha, n, "", res.achieved_psnr),
        ("dwr", name, alpha, n, "", res.achieved_dwr),
        ("dwr_analytic", name, alpha, n, "", metrics.analytic_dwr(alpha)),
    ]


def run_transparency_sweep(dataset, alphas, n_values, seed: int = 1, mask=DEFAULT_MASK,
                           workers: int = 1) -> Report:
    report = Report(metrics.REPORT_CSV_HEADER)
    cells = []
    for name, img in load_dataset(dataset):
        if isinstance(img, Exception):
            report.rows.append(("error", name, None, None, _clean(img), math.nan))
            report.errors.append(f"{name}: {img}")
            continue
        cells += [(name, img, float(a), int(n), seed, mask) for a in alphas for n in n_values]
    for cell, rows in zip(cells, _map(_safe(_transparency_cell), cells, workers)):
        _collect(report, cell, rows)
    return report.sort()


def _safe(fn):
    return _Safe(fn)


class _Safe:
    """Picklable wrapper turning a cell exception into an error marker."""

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, cell):
        try:
            return self.fn(cell)
        except Exception as exc:
            return exc


def _collect(report: Report, cell, rows):
    if isinstance(rows, Exception):
        name, _, alpha, n = cell[:4]
        report.rows.append(("error", name, alpha, n, _clean(rows), math.nan))
        report.errors.append(f"{cell[0]} alpha={cell[2]} n={cell[3]}: {rows}")
    else:
        report.rows.extend(rows)


# -- bit error rate ----------------------------------------------------------

BER_CSV_HEADER = metrics.REPORT_CSV_HEADER + ",ci_low,ci_high"


def _ber_rows(image, alpha, n, snr, model, errors, trials):
    lo, hi = metrics.wilson_interval(errors, trials)
    return (f"ber:{model}", image, alpha, n, f"snr={snr:g}", errors / trials, lo, hi)


def _synthetic_cell(cell):
    alpha, n, snr, trials, models, seed, scale, batch = cell
    cfg = SyntheticTrialConfig(alpha, n, snr, trials, tuple(models), scale, seed, batch)
    count = run_synthetic(cfg)
    return [_ber_rows("synthetic", alpha, n, snr, m, count.errors[m], count.trials) for m in models]


def _image_ber_cell(cell):
    name, img, alpha, n, snr, trials, models, seed, domain = cell
    key = WatermarkKey(seed, alpha, n)
    nbits = validate_key(key, img.shape)
    bits = payload_bits(seed, nbits)
    marked = embed_image(img, bits, key).watermarked
    errors = {m: 0 for m in models}
    for t in range(trials):
        noise_seed = keystream.derive_seed(seed, 0x4015E, t)
        # pixel noise of scale b has the same per-coefficient variance 2 b^2
        attacked, scale_n = attacks.noisy_image(marked, snr, noise_seed, domain)
        for m in models:
            got = extract_image(attacked, key, nbits, scale_n if m != "laplace-clean" else None, m)
            errors[m] += int(np.count_nonzero(got != bits))
    return [_ber_rows(name, alpha, n, snr, m, errors[m], trials * nbits) for m in models]


def reference_scale(image) -> float:
    """Laplacian scale of an image's mid-band coefficients."""
    img = np.asarray(image)
    h, w = img.shape
    region = img[: h - h % 4, : w - w % 4]
    return mle_scale(gather_midband(forward_block_dct(region), DEFAULT_MASK))


def run_ber_sweep(mode: str, snr_range, alphas, n_values, trials: int, models=("laplace-noisy", "gaussian"),
                  seed: int = 1, reference_image=None, dataset=None, domain: str = "dct",
                  workers: int = 1, batch: int = 64) -> Report:
    """BER per (model, SNR, alpha, N) with a 95% Wilson interval.

    ``synthetic`` mode draws Laplacian hosts (scale fitted to
    ``reference_image`` when given, else 1); ``trials`` counts bits.
    ``image`` mode embeds into every dataset image and repeats the noise
    ``trials`` times, each trial covering the full payload.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for m in models:
        if m not in MODELS:
            raise ValueError(f"unknown model {m!r}")
    report = Report(BER_CSV_HEADER)
    cells = []
    if mode == "synthetic":
        scale = reference_scale(reference_image) if reference_image is not None else 1.0
        for a in alphas:
            for n in n_values:
                for snr in snr_range:
                    cell_seed = keystream.derive_seed(seed, int(n), int(round(a * 1e6)), int(round(snr * 1e3)) & 0xFFFFFFFF)
                    cells.append((float(a), int(n), float(snr), int(trials), tuple(models), cell_seed, scale, batch))
        fn = _synthetic_cell
    elif mode == "image":
        for name, img in load_dataset(dataset):
            if isinstance(img, Exception):
                report.errors.append(f"{name}: {img}")
                continue
            cells += [(name, img, float(a), int(n), float(snr), int(trials), tuple(models), seed, domain)
                      for a in alphas for n in n_values for snr in snr_range]
        fn = _image_ber_cell
    else:
        raise ValueError(f"mode must be 'synthetic' or 'image', got {mode!r}")
    for cell, rows in zip(cells, _map(_safe(fn), cells, workers)):
        if isinstance(rows, Exception):
            report.errors.append(f"cell {cell[:4]}: {rows}")
        else:
            report.rows.extend(rows)
    return report.sort(key=lambda r: (r[1], r[2], r[3], float(r[4].split("=")[1]), r[0]))


# -- attack suite ------------------------------------------------------------

@dataclass(frozen=True)
class Strength:
    """Embedding strength: a fixed alpha, a measured PSNR target, or a
    target on the reference PSNR curve."""

    kind: str
    value: float

    @classmethod
    def parse(cls, text) -> "Strength":
        t = str(text).strip().lower()
        for prefix, kind in (("ref-psnr:", "ref-psnr"), ("psnr:", "psnr")):
            if t.startswith(prefix):
                return cls(kind, float(t[len(prefix):]))
        return cls("alpha", float(t))

    def alpha(self, image, key: WatermarkKey, nbits: int) -> float:
        if self.kind == "alpha":
            return self.value
        if self.kind == "ref-psnr":
            return reference_alpha_for_psnr(self.value)
        return alpha_for_psnr(image, key, nbits, self.value)

    def __str__(self):
        return f"{self.value:g}" if self.kind == "alpha" else f"{self.kind}:{self.value:g}"


def _attack_cell(cell):
    name, img, strength, n, grid, seed, repeats, mask = cell
    rows = []
    sent_all, got_all = {}, {}
    alphas = []
    for r in range(repeats):
        key_seed = keystream.derive_seed(seed, 0x4B, r)
        key = WatermarkKey(key_seed, 0.5, n, mask)
        nbits = validate_key(key, (img.shape[0] - img.shape[0] % 4, img.shape[1] - img.shape[1] % 4))
        key = key.with_alpha(strength.alpha(img, key, nbits))
        alphas.append(key.alpha)
        bits = payload_bits(key_seed, nbits)
        marked = embed_image(img, bits, key).watermarked
        for kind, param in [("none", None)] + list(grid):
            label = "none" if kind == "none" else attacks.AttackSpec(kind, param).label
            if kind == "none":
                attacked = marked
            else:
                spec = attacks.AttackSpec(kind, param, keystream.derive_seed(seed, 0xA7, r))
                attacked = spec.apply(marked)
            got = extract_image(attacked, key, nbits)
            sent_all.setdefault(label, []).append(bits)
            got_all.setdefault(label, []).append(got)
    alpha = float(np.mean(alphas))
    for label in sent_all:
        b = metrics.ber(np.concatenate(sent_all[label]), np.concatenate(got_all[label]))
        rows.append(("ber", name, alpha, n, label, b))
        rows.append(("recovery", name, alpha, n, label, 1.0 - b))
    return rows


def run_attack_suite(dataset, strength, n: int, attack_grid, seed: int = 1, repeats: int = 1,
                     mask=DEFAULT_MASK, workers: int = 1) -> Report:
    """Embed, attack and extract for every image and grid cell.

    ``strength`` is an alpha, ``"psnr:<dB>"`` (measured per image) or
    ``"ref-psnr:<dB>"``. ``repeats`` embeds independent keys/payloads and
    pools their bits; the ``alpha`` column holds the mean strength used.
    """
    strength = strength if isinstance(strength, Strength) else Strength.parse(strength)
    grid = parse_attack_grid(attack_grid) if isinstance(attack_grid, str) else list(attack_grid)
    report = Report(metrics.REPORT_CSV_HEADER)
    cells = []
    for name, img in load_dataset(dataset):
        if isinstance(img, Exception):
            report.rows.append(("error", name, None, n, _clean(img), math.nan))
            report.errors.append(f"{name}: {img}")
            continue
        cells.append((name, img, strength, int(n), tuple(grid), seed, repeats, mask))
    for cell, rows in zip(cells, _map(_safe(_attack_cell), cells, workers)):
        if isinstance(rows, Exception):
            report.rows.append(("error", cell[0], None, n, _clean(rows), math.nan))
            report.errors.append(f"{cell[0]}: {rows}")
        else:
            report.rows.extend(rows)
    return report.sort()


def dataset_means(report: Report, metric: str) -> dict[str, float]:
    """Mean of ``metric`` over images, per ``param`` label."""
    cols = report.header.split(",")
    acc = {}
    for r in report.rows:
        row = dict(zip(cols, r))
        if row["metric"] == metric:
            acc.setdefault(row["param"], []).append(float(row["value"]))
    return {k: float(np.mean(v)) for k, v in acc.items()}
