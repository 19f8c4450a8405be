"""Multiplicative spread-spectrum embedding into mid-band block-DCT coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import keystream, metrics
from .core import CapacityError, WatermarkKey, as_bits, as_gray_image, crop_box, validate_key
from .transform import forward_block_dct, gather_midband, inverse_block_dct_real, quantize, scatter_midband


def embed_stream(x, bit: int, chips, alpha: float) -> np.ndarray:
    """``y = x * (1 + alpha * (2b - 1) * w)`` for one bit's segment."""
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(chips, dtype=np.float64)
    if x.shape != w.shape:
        raise ValueError(f"segment length {x.size} != chip count {w.size}")
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    return x * (1.0 + alpha * (2 * bit - 1) * w)


def chip_signs(key: WatermarkKey, nbits: int) -> np.ndarray:
    """Chips for ``nbits`` bits; row ``k`` spreads bit ``k``."""
    n = key.chips_per_bit
    return keystream.generate_chips(key.seed, nbits * n).reshape(nbits, n)


def embed_coefficients(x, bits, chips, alpha: float) -> np.ndarray:
    """Embed bit ``k`` into ``x[k*N:(k+1)*N]``; trailing coefficients are kept."""
    x = np.asarray(x, dtype=np.float64)
    bits = as_bits(bits)
    chips = np.asarray(chips)
    nbits, n = chips.shape
    if bits.size != nbits or nbits * n > x.size:
        raise ValueError("payload, chips and stream sizes are inconsistent")
    y = x.copy()
    signs = (2.0 * bits[:, None] - 1.0) * chips
    y[: nbits * n] = (x[: nbits * n].reshape(nbits, n) * (1.0 + alpha * signs)).ravel()
    return y


@dataclass(frozen=True)
class EmbedResult:
    watermarked: np.ndarray
    achieved_psnr: float
    achieved_dwr: float
    bits_embedded: int


def embed_image(cover, payload, key: WatermarkKey) -> EmbedResult:
    """Embed ``payload`` into ``cover``.

    Dimensions that are not multiples of 4 are center-cropped for embedding;
    the border pixels are copied through. PSNR is measured on the written
    8-bit image, DWR on the modified coefficients before quantization.
    """
    cover = as_gray_image(cover)
    bits = as_bits(payload)
    rows, cols = crop_box(cover.shape)
    region = cover[rows, cols]
    capacity = validate_key(key, region.shape)
    if bits.size > capacity:
        raise CapacityError(f"payload of {bits.size} bits exceeds capacity {capacity}")

    plane = forward_block_dct(region)
    x = gather_midband(plane, key)
    used = bits.size * key.chips_per_bit
    y = embed_coefficients(x, bits, chip_signs(key, bits.size), key.alpha)
    marked = quantize(inverse_block_dct_real(scatter_midband(plane, y, key)))

    out = cover.copy()
    out[rows, cols] = marked
    dwr = metrics.dwr(x[:used], y[:used]) if used else math.inf
    return EmbedResult(out, metrics.psnr(cover, out), dwr, int(bits.size))


def alpha_for_psnr(cover, key: WatermarkKey, nbits: int, target_psnr: float) -> float:
    """Strength giving ``target_psnr`` before quantization.

    By Parseval the pixel-domain squared error equals ``alpha**2`` times the
    energy of the modified coefficients.
    """
    cover = as_gray_image(cover)
    rows, cols = crop_box(cover.shape)
    x = gather_midband(forward_block_dct(cover[rows, cols]), key)
    energy = float(np.sum(x[: nbits * key.chips_per_bit] ** 2))
    if energy == 0.0:
        raise ValueError("host coefficients carry no energy")
    target_mse = 255.0**2 * 10.0 ** (-target_psnr / 10.0)
    alpha = math.sqrt(target_mse * cover.size / energy)
    if not alpha < 1.0:
        raise ValueError(f"target PSNR {target_psnr} dB needs alpha={alpha:.3f} >= 1")
    return alpha
