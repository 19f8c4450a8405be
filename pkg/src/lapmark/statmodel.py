"""Laplacian host and noise model.

Everything here uses the scale form ``f(t) = exp(-|t|/b) / (2b)``; a rate
``lambda`` converts as ``b = 1/lambda``. The generalized Gaussian family
``A exp(-|beta (x - m)|^c)`` reduces to this density for ``c = 1``; no other
shape is fitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

# relative gap below which two scales are treated as equal in sum_density
EQUAL_SCALE_RTOL = 1e-9


def _check_scale(*scales):
    for s in scales:
        if not (np.all(np.asarray(s) > 0) and np.all(np.isfinite(s))):
            raise ValueError(f"scale must be positive and finite, got {s}")


def laplace_pdf(t, scale):
    _check_scale(scale)
    t = np.asarray(t, dtype=np.float64)
    return np.exp(-np.abs(t) / scale) / (2.0 * scale)


def laplace_logpdf(t, scale):
    _check_scale(scale)
    return -np.abs(np.asarray(t, dtype=np.float64)) / scale - np.log(2.0 * np.asarray(scale, dtype=np.float64))


def laplace_cdf(t, scale):
    _check_scale(scale)
    t = np.asarray(t, dtype=np.float64)
    half_tail = 0.5 * np.exp(-np.abs(t) / scale)
    return np.where(t < 0, half_tail, 1.0 - half_tail)


def mle_scale(samples) -> float:
    """Maximum-likelihood Laplacian scale: the mean absolute value.

    The corresponding rate estimate is ``len(samples) / sum(|x|)``.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("mle_scale needs at least one sample")
    scale = float(np.mean(np.abs(x)))
    if scale == 0.0:
        raise ValueError("all samples are zero; the Laplacian MLE is undefined")
    return scale


@dataclass(frozen=True)
class SumDensityParams:
    """Scales of two independent zero-mean Laplacians whose sum is modeled."""

    scale_a: float
    scale_b: float

    def __post_init__(self):
        _check_scale(self.scale_a, self.scale_b)


def _is_equal(a, b):
    return np.abs(a - b) < EQUAL_SCALE_RTOL * a


def sum_density(z, params: SumDensityParams):
    """Density of X + N for Laplacian X (scale a) and N (scale b).

    ``[a exp(-|z|/a) - b exp(-|z|/b)] / (2 (a^2 - b^2))``, with the limit
    ``(1 + |z|/a) exp(-|z|/a) / (4a)`` when the scales coincide.
    """
    a, b = float(params.scale_a), float(params.scale_b)
    u = np.abs(np.asarray(z, dtype=np.float64))
    if abs(a - b) < EQUAL_SCALE_RTOL * a:
        return (1.0 + u / a) * np.exp(-u / a) / (4.0 * a)
    return (a * np.exp(-u / a) - b * np.exp(-u / b)) / (2.0 * (a * a - b * b))


def log_sum_density_parts(u, a, b):
    """Split ``log sum_density`` into a z-dependent part and a constant.

    Returns ``(zpart, const)`` with ``log f = zpart - const``; ``const`` has
    the broadcast shape of ``a`` and ``b`` only. Evaluated in the log domain
    so large ``|z|`` does not underflow.
    """
    u = np.asarray(u, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    eq = _is_equal(a, b)
    if np.any(eq):
        # generic branch on a safe stand-in, limit form patched in afterwards
        b_gen = np.where(eq, 2.0 * b, b)
    else:
        b_gen = b
    la = np.array(np.log(a) - u / a, dtype=np.float64)
    lb = np.log(b_gen) - u / b_gen
    # for u >= 0 the sign of la - lb never changes, so this never hits log(0)
    zpart = np.maximum(la, lb)
    la -= lb
    np.abs(la, out=la)
    np.negative(la, out=la)
    np.exp(la, out=la)
    np.negative(la, out=la)
    np.log1p(la, out=la)
    zpart += la
    const = np.log(2.0 * np.abs(a * a - b_gen * b_gen))
    if np.any(eq):
        zpart = np.where(eq, np.log1p(u / a) - u / a, zpart)
        const = np.where(eq, np.log(4.0 * a), const)
    return zpart, const


def log_sum_density(z, scale_a, scale_b):
    zpart, const = log_sum_density_parts(np.abs(z), scale_a, scale_b)
    return zpart - const


def sum_cdf_grid(scale_a: float, scale_b: float, edges) -> np.ndarray:
    """Closed-form CDF of X + N at ``edges`` (used for histogram checks)."""
    a, b = float(scale_a), float(scale_b)
    e = np.asarray(edges, dtype=np.float64)
    u = np.abs(e)
    if abs(a - b) < EQUAL_SCALE_RTOL * a:
        tail = (2.0 + u / a) * np.exp(-u / a) / 4.0
    else:
        tail = (a * a * np.exp(-u / a) - b * b * np.exp(-u / b)) / (2.0 * (a * a - b * b))
    return np.where(e < 0, tail, 1.0 - tail)


def ks_distance(samples, cdf) -> float:
    """Sup-distance between the empirical CDF of ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = x.size
    f = cdf(x)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(n) / n
    return float(max(upper.max(), lower.max()))


@dataclass(frozen=True)
class FitReport:
    scale: float
    ks_laplace: float
    ks_gauss: float

    def csv_row(self, image: str) -> str:
        return f"{image},{self.scale!r},{self.ks_laplace!r},{self.ks_gauss!r}"


FIT_CSV_HEADER = "image,scale,ks_laplace,ks_gauss"


def fit_report(coeffs) -> FitReport:
    """Fitted Laplacian scale with KS distances for Laplacian and Gaussian fits."""
    x = np.asarray(coeffs, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("fit_report needs a nonempty stream")
    scale = mle_scale(x)
    ks_lap = ks_distance(x, lambda t: laplace_cdf(t, scale))
    # zero-mean Gaussian MLE, matching the zero-mean Laplacian fit
    sigma = math.sqrt(float(np.mean(x * x)))
    ks_gauss = ks_distance(x, lambda t: ndtr(t / sigma))
    return FitReport(scale, ks_lap, ks_gauss)
