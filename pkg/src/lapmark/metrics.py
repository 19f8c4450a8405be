"""Distortion and error-rate metrics."""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import binomtest

REPORT_CSV_HEADER = "metric,image,alpha,n,param,value"


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def mse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))


def psnr(cover, test) -> float:
    """PSNR in dB for 8-bit images; ``inf`` when the images are identical."""
    err = mse(cover, test)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / err)


def dwr(cover_coeffs, wm_coeffs) -> float:
    """Document-to-watermark ratio in dB (``inf`` if nothing was modified)."""
    x, y = _pair(cover_coeffs, wm_coeffs)
    host = float(np.sum(x * x))
    if host == 0.0:
        raise ValueError("cover energy is zero")
    wm = float(np.sum((y - x) ** 2))
    if wm == 0.0:
        return math.inf
    return 10.0 * math.log10(host / wm)


def analytic_dwr(alpha: float) -> float:
    return -20.0 * math.log10(alpha)


def analytic_sum_mse(alpha: float, n: int, scale: float) -> float:
    """Expected total squared perturbation of ``n`` Laplacian host samples."""
    return 2.0 * n * alpha**2 * scale**2


def ber(sent, received) -> float:
    s = np.asarray(sent).ravel()
    r = np.asarray(received).ravel()
    if s.shape != r.shape:
        raise ValueError(f"payload length mismatch: {s.size} vs {r.size}")
    if s.size == 0:
        raise ValueError("empty payload")
    return float(np.count_nonzero(s != r)) / s.size


def recovery_rate(sent, received) -> float:
    return 1.0 - ber(sent, received)


def wilson_interval(errors: int, trials: int) -> tuple[float, float]:
    """95% Wilson score interval for an error proportion."""
    ci = binomtest(int(errors), int(trials)).proportion_ci(0.95, method="wilson")
    return float(ci.low), float(ci.high)


def report_row(metric: str, image: str, alpha, n, param, value) -> str:
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return repr(v)
        return str(v)

    return ",".join(fmt(v) for v in (metric, image, alpha, n, param, value))
