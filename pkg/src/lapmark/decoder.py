"""Blind maximum-likelihood extraction.

Under bit ``b`` chip ``i`` of a received segment is modeled as Laplacian with
scale ``s_x * (1 + alpha * (2b - 1) * w_i)``, optionally plus independent
Laplacian noise of scale ``s_n``. Since ``w_i = +-1`` only two conditional
scales occur, ``s_x (1 + alpha)`` and ``s_x (1 - alpha)``, and every
log-likelihood ratio reduces to ``sum_i w_i G(z_i)`` for a per-sample G.

Segment arguments may be 1-D (one bit) or 2-D ``(bits, N)``; per-segment
parameters then broadcast along the first axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import WatermarkKey, as_gray_image, crop_box, validate_key
from .embedder import chip_signs
from .statmodel import SumDensityParams, _is_equal, laplace_pdf, log_sum_density_parts, mle_scale, sum_density
from .transform import forward_block_dct, gather_midband

Model = Literal["laplace-clean", "laplace-noisy", "gaussian"]
MODELS = ("laplace-clean", "laplace-noisy", "gaussian")


@dataclass(frozen=True)
class DecisionTrace:
    """One bit decision: ``bit = 1`` iff ``statistic >= threshold``."""

    statistic: float
    threshold: float
    bit: int
    per_chip_terms: np.ndarray | None = None
    fallback: bool = False


def _segments(z, chips):
    z = np.asarray(z, dtype=np.float64)
    w = np.asarray(chips, dtype=np.float64)
    if z.shape != w.shape or z.ndim not in (1, 2):
        raise ValueError(f"segment shape {z.shape} does not match chips {w.shape}")
    if z.shape[-1] == 0:
        raise ValueError("empty segment")
    return z, w


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def _per_row(value, z):
    """Broadcast a scalar or per-segment parameter against the last axis."""
    v = np.asarray(value, dtype=np.float64)
    if not (np.all(v > 0) and np.all(np.isfinite(v))):
        raise ValueError(f"scale parameters must be positive and finite, got {value}")
    return v[..., None] if (v.ndim == 1 and z.ndim == 2) else v


def _trace(stat, thr, terms=None, fallback=False):
    stat, thr = float(stat), float(thr)
    return DecisionTrace(stat, thr, int(stat >= thr), terms, bool(fallback))


# -- clean channel ---------------------------------------------------------

def clean_statistic(y, chips, alpha, scale_x):
    """``T = sum |y_i| w_i`` and its threshold, for one or many segments."""
    _check_alpha(alpha)
    y, w = _segments(y, chips)
    scale = np.asarray(scale_x, dtype=np.float64)
    if not (np.all(scale > 0) and np.all(np.isfinite(scale))):
        raise ValueError(f"scale_x must be positive, got {scale_x}")
    t = np.sum(np.abs(y) * w, axis=-1)
    k = (1.0 - alpha * alpha) / (2.0 * alpha) * math.log((1.0 + alpha) / (1.0 - alpha))
    tau = k * scale * np.sum(w, axis=-1)
    return t, tau


def decode_clean(y, chips, alpha: float, scale_x: float) -> DecisionTrace:
    t, tau = clean_statistic(y, chips, alpha, scale_x)
    return _trace(t, tau, np.abs(np.asarray(y, dtype=np.float64)) * np.asarray(chips))


# -- noisy channel ---------------------------------------------------------

def _excess(u, a, b):
    """``log|a e^{-u/a} - b e^{-u/b}| - (log b - u/b)``, i.e. the part of the
    sum-density log that depends on the host scale ``a``.

    ``d = log(a/b) - u (1/a - 1/b)`` keeps one sign for all ``u >= 0``, and
    the excess is ``max(d, 0) + log1p(-exp(-|d|))``.
    """
    d = np.log(a / b) - u * (1.0 / a - 1.0 / b)
    out = np.maximum(d, 0.0)
    np.abs(d, out=d)
    np.negative(d, out=d)
    np.exp(d, out=d)
    np.negative(d, out=d)
    np.log1p(d, out=d)
    out += d
    return out


def noisy_statistic(z, chips, alpha, scale_x, scale_n):
    """``(sum_i w_i F(z_i), tau_n)`` for Laplacian host plus Laplacian noise.

    With ``s+- = s_x (1 +- alpha)`` and the sum density written as
    ``log f(z; s) = g(|z|; s) - c(s)``, ``F = g(.; s+) - g(.; s-)`` and
    ``tau_n = sum_i w_i [c(s+) - c(s-)]``, so ``stat - tau_n`` is exactly the
    log-likelihood ratio. Equal host and noise scales use the limit density.
    """
    _check_alpha(alpha)
    z, w = _segments(z, chips)
    s = _per_row(scale_x, z)
    sn = _per_row(scale_n, z)
    u = np.abs(z)
    s_plus, s_minus = s * (1.0 + alpha), s * (1.0 - alpha)
    if np.any(_is_equal(s_plus, sn)) or np.any(_is_equal(s_minus, sn)):
        g_plus, c_plus = log_sum_density_parts(u, s_plus, sn)
        g_minus, c_minus = log_sum_density_parts(u, s_minus, sn)
        f = g_plus - g_minus
    else:
        f = _excess(u, s_plus, sn)
        f -= _excess(u, s_minus, sn)
        c_plus = np.log(2.0 * np.abs(s_plus**2 - sn**2))
        c_minus = np.log(2.0 * np.abs(s_minus**2 - sn**2))
    stat = np.einsum("...i,...i->...", w, f)
    tau = (c_plus - c_minus)[..., 0] * np.sum(w, axis=-1) if z.ndim == 2 else (c_plus - c_minus) * np.sum(w)
    return stat, tau, f


def decode_noisy(z, chips, alpha: float, scale_x: float, scale_n: float) -> DecisionTrace:
    stat, tau, f = noisy_statistic(z, chips, alpha, scale_x, scale_n)
    if not (np.isfinite(stat) and np.isfinite(tau)):
        oracle = decode_llr_oracle(z, chips, alpha, scale_x, scale_n)
        return DecisionTrace(oracle.statistic, 0.0, oracle.bit, oracle.per_chip_terms, True)
    return _trace(stat, tau, f * np.asarray(chips))


# -- ground truth ----------------------------------------------------------

def llr_terms(z, chips, alpha, scale_x, scale_n=None):
    """Per-chip ``log f(z|b=1) - log f(z|b=0)`` straight from the densities."""
    _check_alpha(alpha)
    z, w = _segments(z, chips)
    if not scale_x > 0 or (scale_n is not None and not scale_n > 0):
        raise ValueError("scales must be positive")
    s_plus, s_minus = scale_x * (1.0 + alpha), scale_x * (1.0 - alpha)
    if scale_n is None:
        f_plus, f_minus = laplace_pdf(z, s_plus), laplace_pdf(z, s_minus)
    else:
        f_plus = sum_density(z, SumDensityParams(s_plus, scale_n))
        f_minus = sum_density(z, SumDensityParams(s_minus, scale_n))
    # scale under b is s_x (1 + alpha (2b - 1) w)
    f1 = np.where(w > 0, f_plus, f_minus)
    f0 = np.where(w > 0, f_minus, f_plus)
    if np.any((f1 <= 0) & (f0 <= 0)):
        raise FloatingPointError("density vanishes under both hypotheses; parameters are corrupt")
    with np.errstate(divide="ignore"):
        return np.log(f1) - np.log(f0)


def decode_llr_oracle(z, chips, alpha: float, scale_x: float, scale_n: float | None = None) -> DecisionTrace:
    terms = llr_terms(z, chips, alpha, scale_x, scale_n)
    return _trace(np.sum(terms), 0.0, terms)


# -- Gaussian baseline -----------------------------------------------------

def gaussian_statistic(z, chips, alpha, sigma_x, sigma_n, terms: bool = True):
    """Summed Gaussian log-likelihood ratio (a weighted energy detector).

    With ``v+-`` the variances for conditional scale ``1 +- alpha`` the ratio
    is ``sum_i w_i [-log(v+/v-)/2 - z_i^2 (1/v+ - 1/v-)/2]``; with
    ``terms=False`` only the row sums of ``w`` and ``w z^2`` are formed.
    """
    _check_alpha(alpha)
    z, w = _segments(z, chips)
    sx = _per_row(sigma_x, z)
    sn = _per_row(sigma_n, z)
    v_plus = sx**2 * (1.0 + alpha) ** 2 + sn**2
    v_minus = sx**2 * (1.0 - alpha) ** 2 + sn**2
    c0 = -0.5 * np.log(v_plus / v_minus)
    c2 = -0.5 * (1.0 / v_plus - 1.0 / v_minus)
    if terms:
        per_chip = w * (c0 + c2 * z * z)
        return np.sum(per_chip, axis=-1), per_chip
    stat = c0[..., 0] * np.sum(w, axis=-1) + c2[..., 0] * np.einsum("...i,...i->...", w, z * z)
    return stat, None


def decode_gaussian_baseline(z, chips, alpha: float, sigma_x: float, sigma_n: float) -> DecisionTrace:
    stat, terms = gaussian_statistic(z, chips, alpha, sigma_x, sigma_n)
    return _trace(stat, 0.0, terms)


# -- blind parameter estimates -----------------------------------------------

def deconvolved_scale(segments, scale_n):
    """Host scale from ``E|Z| = (a^2 + a b + b^2) / (a + b)`` given noise scale ``b``.

    Works per row of a 2-D array; rows where the noise dominates the mean
    fall back to the plain MLE ``mean|z|``.
    """
    z = np.asarray(segments, dtype=np.float64)
    m = np.mean(np.abs(z), axis=-1)
    if np.any(m == 0):
        raise ValueError("all-zero segment; the Laplacian MLE is undefined")
    b = np.asarray(scale_n, dtype=np.float64)
    disc = (m - b) ** 2 - 4.0 * (b * b - m * b)
    a = 0.5 * ((m - b) + np.sqrt(np.maximum(disc, 0.0)))
    out = np.where((disc >= 0) & (a > 0), a, m)
    return float(out) if out.ndim == 0 else out


def estimate_noise_scale(image) -> float:
    """Robust Laplacian noise scale from the highest-frequency DCT residual.

    Uses ``median(|c|) / ln 2`` over the (2,3), (3,2), (3,3) coefficients,
    where natural-image content is weakest.
    """
    img = as_gray_image(image)
    rows, cols = crop_box(img.shape)
    hf = gather_midband(forward_block_dct(img[rows, cols]), ((2, 3), (3, 2), (3, 3)))
    med = float(np.median(np.abs(hf)))
    return max(med / math.log(2.0), 1e-6)


def decode_batch(z, chips, alpha: float, model: Model = "laplace-clean", noise_scale=None):
    """Blind decoding of every row of ``z``.

    Host parameters are estimated from each received row. ``noise_scale``
    (Laplacian scale, scalar or per row) is required by the noisy model and
    optional for the Gaussian one. Returns ``(statistic, threshold, bits)``.
    """
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    w = np.atleast_2d(chips)
    if model == "laplace-clean":
        scale = np.mean(np.abs(z), axis=-1)
        if np.any(scale == 0):
            raise ValueError("all-zero segment; the Laplacian MLE is undefined")
        stat, thr = clean_statistic(z, w, alpha, scale)
    elif model == "laplace-noisy":
        if noise_scale is None:
            raise ValueError("the noisy model needs a noise scale")
        sn = np.broadcast_to(np.asarray(noise_scale, dtype=np.float64), z.shape[:1])
        stat, thr, _ = noisy_statistic(z, w, alpha, deconvolved_scale(z, sn), sn)
    elif model == "gaussian":
        power = np.mean(z * z, axis=-1)
        if np.any(power == 0):
            raise ValueError("all-zero segment")
        var_n = 2.0 * np.asarray(noise_scale, dtype=np.float64) ** 2 if noise_scale is not None else 0.0
        var_x = power - var_n
        sx = np.sqrt(np.where(var_x > 0, var_x, 1e-6 * power))
        # the baseline needs a positive noise variance; use a negligible one when absent
        sn = np.sqrt(var_n) if noise_scale is not None else 1e-9 * sx
        sn = np.broadcast_to(sn, sx.shape)
        stat, _ = gaussian_statistic(z, w, alpha, sx, sn, terms=False)
        thr = np.zeros_like(stat)
    else:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    return stat, thr, (stat >= thr).astype(np.uint8)


def decode_segments(z, chips, alpha: float, model: Model = "laplace-clean", noise_scale=None):
    """Like :func:`decode_batch` but returns one :class:`DecisionTrace` per row.

    Rows whose noisy statistic is not finite are re-decided by the exact
    likelihood oracle and flagged.
    """
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    w = np.atleast_2d(chips)
    stat, thr, bits = decode_batch(z, w, alpha, model, noise_scale)
    traces = []
    for k in range(z.shape[0]):
        if np.isfinite(stat[k]) and np.isfinite(thr[k]):
            traces.append(DecisionTrace(float(stat[k]), float(thr[k]), int(bits[k])))
            continue
        sn = float(np.broadcast_to(noise_scale, z.shape[:1])[k]) if noise_scale is not None else None
        sx = deconvolved_scale(z[k], sn) if sn else mle_scale(z[k])
        oracle = decode_llr_oracle(z[k], w[k], alpha, sx, sn)
        traces.append(DecisionTrace(oracle.statistic, 0.0, oracle.bit, None, True))
    return traces


def extract_traces(image, key: WatermarkKey, bit_count: int, noise_scale: float | None = None,
                   model: Model = "laplace-clean") -> list[DecisionTrace]:
    img = as_gray_image(image)
    rows, cols = crop_box(img.shape)
    region = img[rows, cols]
    capacity = validate_key(key, region.shape)
    if not 0 < bit_count <= capacity:
        raise ValueError(f"bit_count {bit_count} outside 1..{capacity}")
    if model == "laplace-noisy" and noise_scale is None:
        noise_scale = estimate_noise_scale(img)
    z = gather_midband(forward_block_dct(region), key)
    n = key.chips_per_bit
    segs = z[: bit_count * n].reshape(bit_count, n)
    return decode_segments(segs, chip_signs(key, bit_count), key.alpha, model, noise_scale)


def extract_image(image, key: WatermarkKey, bit_count: int, noise_scale: float | None = None,
                  model: Model = "laplace-clean") -> np.ndarray:
    traces = extract_traces(image, key, bit_count, noise_scale, model)
    return np.array([t.bit for t in traces], dtype=np.uint8)
