"""Synthetic bit-error simulation in the coefficient domain.

Trial ``t`` draws a Laplacian host segment, chips, a payload bit and channel
noise from four independent keyed streams, each consumed at offset
``t * N``; any subset of trials can therefore be regenerated exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import keystream
from .attacks import noise_scale_for_snr
from .decoder import MODELS, decode_batch


@dataclass(frozen=True)
class SyntheticTrialConfig:
    alpha: float
    chips_per_bit: int
    snr_db: float
    trials: int
    models: tuple[str, ...] = ("laplace-noisy", "gaussian")
    host_scale: float = 1.0
    seed: int = 0
    batch: int = 64


@dataclass
class BerCount:
    errors: dict = field(default_factory=dict)
    trials: int = 0

    def ber(self, model: str) -> float:
        return self.errors[model] / self.trials


def _streams(seed: int):
    return tuple(keystream.derive_seed(seed, k) for k in range(4))


def simulate_batch(cfg: SyntheticTrialConfig, first: int, count: int):
    """Received segments and ground truth for trials ``first .. first+count-1``."""
    n = cfg.chips_per_bit
    s_host, s_chip, s_bit, s_noise = _streams(cfg.seed)
    x = keystream.laplace_samples(s_host, count * n, cfg.host_scale, start=first * n).reshape(count, n)
    w = keystream.generate_chips(s_chip, count * n, start=first * n).reshape(count, n)
    bits = (keystream.generate_chips(s_bit, count, start=first) > 0).astype(np.uint8)
    y = x * (1.0 + cfg.alpha * (2.0 * bits[:, None] - 1.0) * w)
    # per-trial noise scale from each segment's own power
    power = np.mean(y * y, axis=1)
    scale_n = np.sqrt(power / 10.0 ** (cfg.snr_db / 10.0) / 2.0)
    noise = keystream.laplace_samples(s_noise, count * n, 1.0, start=first * n).reshape(count, n)
    z = y + scale_n[:, None] * noise
    return z, w, bits, scale_n


def run_synthetic(cfg: SyntheticTrialConfig) -> BerCount:
    for m in cfg.models:
        if m not in MODELS:
            raise ValueError(f"unknown model {m!r}")
    count = BerCount({m: 0 for m in cfg.models})
    for first in range(0, cfg.trials, cfg.batch):
        k = min(cfg.batch, cfg.trials - first)
        z, w, bits, scale_n = simulate_batch(cfg, first, k)
        for m in cfg.models:
            _, _, decided = decode_batch(z, w, cfg.alpha, m, scale_n if m != "laplace-clean" else None)
            count.errors[m] += int(np.count_nonzero(decided != bits))
        count.trials += k
    return count


__all__ = ["BerCount", "SyntheticTrialConfig", "noise_scale_for_snr", "run_synthetic", "simulate_batch"]
