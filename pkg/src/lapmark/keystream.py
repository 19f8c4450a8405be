"""Keyed SplitMix64 stream: spreading chips, uniforms and Laplacian draws.

Output ``i`` (0-based) is ``mix(seed + (i + 1) * GAMMA mod 2**64)``, which is
exactly the sequence produced by the usual SplitMix64 ``next()`` loop, so it
can be computed for any index independently.
"""

from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
M1 = 0xBF58476D1CE4E5B9
M2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1


def splitmix64_scalar(seed: int, count: int) -> list[int]:
    """Reference implementation with Python integers."""
    s = seed & _MASK
    out = []
    for _ in range(count):
        s = (s + GAMMA) & _MASK
        z = s
        z = ((z ^ (z >> 30)) * M1) & _MASK
        z = ((z ^ (z >> 27)) * M2) & _MASK
        out.append(z ^ (z >> 31))
    return out


def splitmix64(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Outputs ``start .. start+count-1`` of the stream as ``uint64``."""
    if count < 0:
        raise ValueError("count must be non-negative")
    z = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    t = np.empty_like(z)
    with np.errstate(over="ignore"):
        z *= np.uint64(GAMMA)
        z += np.uint64(seed & _MASK)
        np.right_shift(z, np.uint64(30), out=t)
        z ^= t
        z *= np.uint64(M1)
        np.right_shift(z, np.uint64(27), out=t)
        z ^= t
        z *= np.uint64(M2)
        np.right_shift(z, np.uint64(31), out=t)
        z ^= t
    return z


def generate_chips(seed: int, count: int, start: int = 0) -> np.ndarray:
    """+1 where bit 63 of the output is set, -1 elsewhere (``int8``)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    top = (splitmix64(seed, count, start) >> np.uint64(63)).astype(np.int8)
    return 2 * top - 1


def uniforms(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Uniform doubles on the open interval (0, 1) from the top 53 bits."""
    u = (splitmix64(seed, count, start) >> np.uint64(11)).astype(np.float64)
    u += 0.5
    u *= 2.0**-53
    return u


def laplace_samples(seed: int, count: int, scale: float = 1.0, start: int = 0) -> np.ndarray:
    """Zero-mean Laplacian draws ``-scale * sign(u - 1/2) * log(1 - 2|u - 1/2|)``."""
    d = uniforms(seed, count, start)
    d -= 0.5
    sign = np.sign(d)
    np.abs(d, out=d)
    d *= -2.0
    np.log1p(d, out=d)
    d *= sign
    d *= -scale
    return d


def derive_seed(seed: int, *labels: int) -> int:
    """Deterministic child seed, e.g. one stream per trial or per image."""
    s = seed & _MASK
    for label in labels:
        s = splitmix64_scalar(s ^ (label & _MASK), 1)[0]
    return s
