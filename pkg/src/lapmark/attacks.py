"""Channel and editing attacks applied between embedding and extraction.

Every attack is a pure function of its input and parameters; random attacks
draw from the keyed SplitMix64 stream so results are reproducible anywhere.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy.optimize import brentq

from . import keystream
from .core import as_gray_image, crop_box
from .transform import forward_block_dct, inverse_block_dct_real, quantize

KINDS = ("laplace-noise", "pixel-loss", "jpeg", "brightness", "auto-adjust")


class AttackError(RuntimeError):
    pass


def noise_scale_for_snr(signal, snr_db: float) -> float:
    """Laplacian scale whose power ``2 b^2`` sits ``snr_db`` below ``mean(signal^2)``."""
    power = float(np.mean(np.square(np.asarray(signal, dtype=np.float64))))
    if power == 0.0:
        raise ValueError("signal has zero power")
    return math.sqrt(power / 10.0 ** (snr_db / 10.0) / 2.0)


def add_laplace_noise(values, snr_db: float, seed: int) -> tuple[np.ndarray, float]:
    """Real-valued ``values + noise`` and the noise scale that was used."""
    v = np.asarray(values, dtype=np.float64)
    if math.isinf(snr_db) and snr_db > 0:
        return v.copy(), 0.0
    if not math.isfinite(snr_db):
        raise ValueError(f"SNR must be finite or +inf, got {snr_db}")
    scale = noise_scale_for_snr(v, snr_db)
    noise = keystream.laplace_samples(seed, v.size, scale).reshape(v.shape)
    return v + noise, scale


def measured_snr(before, after) -> float:
    b = np.asarray(before, dtype=np.float64)
    err = np.asarray(after, dtype=np.float64) - b
    return 10.0 * math.log10(float(np.mean(b * b)) / float(np.mean(err * err)))


def noisy_image(image, snr_db: float, seed: int, domain: str = "pixel") -> tuple[np.ndarray, float]:
    """8-bit image with Laplacian noise and the noise scale actually used.

    Clipping to [0, 255] and rounding change the realised SNR, most at low
    SNR. The scale is therefore tuned (same draws, root find on a multiplier)
    so the written image meets ``snr_db``; where no multiplier in
    [1/4, 4] does, the nominal scale is kept.
    """
    img = as_gray_image(image)
    if math.isinf(snr_db) and snr_db > 0:
        return img.copy(), 0.0
    if not math.isfinite(snr_db):
        raise ValueError(f"SNR must be finite or +inf, got {snr_db}")
    if domain not in ("pixel", "dct"):
        raise ValueError(f"domain must be 'pixel' or 'dct', got {domain!r}")
    rows, cols = crop_box(img.shape)
    base = img.astype(np.float64) if domain == "pixel" else forward_block_dct(img[rows, cols])
    nominal = noise_scale_for_snr(base, snr_db)
    unit = keystream.laplace_samples(seed, base.size, 1.0).reshape(base.shape)

    def render(scale):
        if domain == "pixel":
            return quantize(base + scale * unit)
        out = img.copy()
        out[rows, cols] = quantize(inverse_block_dct_real(base + scale * unit))
        return out

    def gap(log_m):
        return measured_snr(img, render(nominal * math.exp(log_m))) - snr_db

    scale = nominal
    g0 = gap(0.0)
    if abs(g0) > 0.02:
        lo, hi = (0.0, math.log(4.0)) if g0 > 0 else (-math.log(4.0), 0.0)
        if gap(lo) * gap(hi) <= 0:
            scale = nominal * math.exp(brentq(gap, lo, hi, xtol=1e-4))
    return render(scale), scale


def laplace_noise_attack(data, snr_db: float, seed: int, domain: str = "pixel"):
    """Add i.i.d. Laplacian noise at ``snr_db``.

    ``data`` is either an 8-bit image or a real coefficient stream (any float
    array), and the result has the same kind. For images the noise goes into
    the pixels (``domain="pixel"``) or into the block-DCT plane
    (``domain="dct"``) and the output is re-quantized at the requested SNR
    (see :func:`noisy_image`). ``snr_db = inf`` returns the input unchanged.
    """
    arr = np.asarray(data)
    if arr.dtype != np.uint8:
        return add_laplace_noise(arr, snr_db, seed)[0]
    return noisy_image(arr, snr_db, seed, domain)[0]


def lost_pixel_count(size: int, fraction: float) -> int:
    return int(math.floor(fraction * size + 0.5))


def pixel_loss_attack(image, loss_fraction: float, seed: int) -> np.ndarray:
    """Set a keyed uniform random subset of pixels to 0.

    The subset is the ``round(fraction * size)`` positions with the smallest
    keystream values (ties broken by position), so no position repeats.
    """
    img = as_gray_image(image)
    if not 0.0 <= loss_fraction < 1.0:
        raise ValueError(f"loss fraction must lie in [0, 1), got {loss_fraction}")
    k = lost_pixel_count(img.size, loss_fraction)
    out = img.copy()
    if k:
        order = np.argsort(keystream.splitmix64(seed, img.size), kind="stable")
        out.reshape(-1)[order[:k]] = 0
    return out


def jpeg_attack(image, quality: int) -> np.ndarray:
    """Baseline grayscale JPEG round trip through Pillow's libjpeg."""
    img = as_gray_image(image)
    if not (1 <= int(quality) <= 100):
        raise ValueError(f"quality must lie in [1, 100], got {quality}")
    try:
        buf = io.BytesIO()
        Image.fromarray(img).save(buf, format="JPEG", quality=int(quality), optimize=False)
        buf.seek(0)
        with Image.open(buf) as decoded:
            out = np.asarray(decoded.convert("L"), dtype=np.uint8).copy()
    except OSError as exc:
        raise AttackError(f"JPEG codec failed: {exc}") from exc
    if out.shape != img.shape:
        raise AttackError(f"JPEG round trip changed shape {img.shape} -> {out.shape}")
    return out


def brightness_attack(image, ratio: float) -> np.ndarray:
    img = as_gray_image(image)
    if not ratio > 0:
        raise ValueError(f"brightness ratio must be positive, got {ratio}")
    return quantize(ratio * img.astype(np.float64))


def auto_adjust_attack(image, low_pct: float = 1.0, high_pct: float = 99.0) -> np.ndarray:
    """Linear stretch of the 1st..99th intensity percentiles onto 0..255."""
    img = as_gray_image(image)
    lo, hi = np.percentile(img, [low_pct, high_pct])
    if hi <= lo:
        return img.copy()
    return quantize((img.astype(np.float64) - lo) * (255.0 / (hi - lo)))


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    parameter: float | None = None
    rng_seed: int = 0
    domain: str = "pixel"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}; expected one of {KINDS}")
        p = self.parameter
        if self.kind != "auto-adjust" and p is None:
            raise ValueError(f"attack {self.kind!r} needs a parameter")
        if self.kind == "pixel-loss" and not 0.0 <= p < 1.0:
            raise ValueError("loss fraction must lie in [0, 1)")
        if self.kind == "jpeg" and not 1 <= p <= 100:
            raise ValueError("JPEG quality must lie in [1, 100]")
        if self.kind == "brightness" and not p > 0:
            raise ValueError("brightness ratio must be positive")

    def apply(self, image) -> np.ndarray:
        if self.kind == "laplace-noise":
            return laplace_noise_attack(as_gray_image(image), self.parameter, self.rng_seed, self.domain)
        if self.kind == "pixel-loss":
            return pixel_loss_attack(image, self.parameter, self.rng_seed)
        if self.kind == "jpeg":
            return jpeg_attack(image, int(self.parameter))
        if self.kind == "brightness":
            return brightness_attack(image, self.parameter)
        return auto_adjust_attack(image)

    @property
    def label(self) -> str:
        return self.kind if self.parameter is None else f"{self.kind}={self.parameter:g}"
