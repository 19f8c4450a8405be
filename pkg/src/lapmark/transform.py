"""Orthonormal 4x4 block DCT and mid-band scatter/gather.

A block-DCT plane is a float array with the image's shape in which each
4x4 tile holds the DCT-II coefficients of the matching pixel tile.
"""

from __future__ import annotations

import numpy as np

from .core import BLOCK, WatermarkKey


def dct_matrix(n: int = BLOCK) -> np.ndarray:
    """Orthonormal DCT-II basis, rows indexed by frequency."""
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    m = np.cos(np.pi * k * (2 * i + 1) / (2 * n)) * np.sqrt(2.0 / n)
    m[0] /= np.sqrt(2.0)
    return m


_D = dct_matrix()


def _tiles(a: np.ndarray) -> np.ndarray:
    h, w = a.shape
    if h % BLOCK or w % BLOCK:
        raise ValueError(f"dimensions {a.shape} are not divisible by {BLOCK}")
    return a.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK).transpose(0, 2, 1, 3)


def _untile(t: np.ndarray) -> np.ndarray:
    hb, wb = t.shape[:2]
    return t.transpose(0, 2, 1, 3).reshape(hb * BLOCK, wb * BLOCK)


def forward_block_dct(image) -> np.ndarray:
    t = _tiles(np.asarray(image, dtype=np.float64))
    return _untile(np.einsum("ui,abij,vj->abuv", _D, t, _D, optimize=True))


def inverse_block_dct_real(plane) -> np.ndarray:
    """Inverse transform without pixel quantization."""
    t = _tiles(np.asarray(plane, dtype=np.float64))
    return _untile(np.einsum("ui,abuv,vj->abij", _D, t, _D, optimize=True))


def quantize(values) -> np.ndarray:
    """Round half away from zero, clamp to [0, 255], cast to uint8."""
    v = np.asarray(values, dtype=np.float64)
    r = np.sign(v) * np.floor(np.abs(v) + 0.5)
    return np.clip(r, 0, 255).astype(np.uint8)


def inverse_block_dct(plane) -> np.ndarray:
    return quantize(inverse_block_dct_real(plane))


def _mask_index(key_or_mask):
    mask = key_or_mask.midband_mask if isinstance(key_or_mask, WatermarkKey) else key_or_mask
    rows = np.array([r for r, _ in mask])
    cols = np.array([c for _, c in mask])
    return rows, cols


def gather_midband(plane, key) -> np.ndarray:
    """Masked coefficients in block-raster order, zig-zag order inside a block."""
    rows, cols = _mask_index(key)
    t = _tiles(np.asarray(plane, dtype=np.float64))
    return t[:, :, rows, cols].reshape(-1).copy()


def scatter_midband(plane, stream, key) -> np.ndarray:
    """Return a copy of ``plane`` with the masked positions replaced by ``stream``."""
    rows, cols = _mask_index(key)
    out = np.array(plane, dtype=np.float64, copy=True)
    t = _tiles(out)  # a view into ``out``
    stream = np.asarray(stream, dtype=np.float64)
    expected = t.shape[0] * t.shape[1] * rows.size
    if stream.shape != (expected,):
        raise ValueError(f"stream length {stream.size} does not match {expected} masked coefficients")
    t[:, :, rows, cols] = stream.reshape(t.shape[0], t.shape[1], rows.size)
    return out
