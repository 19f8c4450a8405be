"""Shared domain types: keys, payloads, images and the coefficient layout.

Images are plain ``uint8`` numpy arrays of shape ``(height, width)``;
coefficient streams are 1-D ``float64`` arrays.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

BLOCK = 4

#: The two anti-diagonals u+v in {2, 3} of the 4x4 DCT plane.
DEFAULT_MASK: tuple[tuple[int, int], ...] = (
    (0, 2), (1, 1), (2, 0), (0, 3), (1, 2), (2, 1), (3, 0),
)

_U64 = 1 << 64


class InvalidKeyError(ValueError):
    """Invalid watermark key or key file."""


class CapacityError(ValueError):
    """Payload does not fit in the image."""


def zigzag_order(mask) -> tuple[tuple[int, int], ...]:
    """Sort block positions into JPEG zig-zag order.

    Even anti-diagonals are walked bottom-left to top-right, odd ones
    top-right to bottom-left, so ``(0, 1)`` precedes ``(1, 0)``.
    """
    def rank(pos):
        r, c = pos
        d = r + c
        return (d, -r if d % 2 == 0 else r)

    return tuple(sorted({(int(r), int(c)) for r, c in mask}, key=rank))


@dataclass(frozen=True)
class WatermarkKey:
    seed: int
    alpha: float
    chips_per_bit: int
    midband_mask: tuple[tuple[int, int], ...] = field(default=DEFAULT_MASK)

    def __post_init__(self):
        if not 0 <= int(self.seed) < _U64:
            raise InvalidKeyError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        alpha = float(self.alpha)
        if not 0.0 < alpha < 1.0:
            raise InvalidKeyError(f"alpha must lie in (0, 1), got {self.alpha}")
        if int(self.chips_per_bit) < 1:
            raise InvalidKeyError(f"chips_per_bit must be >= 1, got {self.chips_per_bit}")
        mask = tuple(self.midband_mask)
        if not mask:
            raise InvalidKeyError("midband mask is empty")
        for r, c in mask:
            if not (0 <= r < BLOCK and 0 <= c < BLOCK):
                raise InvalidKeyError(f"mask position {(r, c)} outside the 4x4 block")
        if (0, 0) in {(int(r), int(c)) for r, c in mask}:
            raise InvalidKeyError("midband mask must not contain the DC position (0, 0)")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "chips_per_bit", int(self.chips_per_bit))
        object.__setattr__(self, "midband_mask", zigzag_order(mask))

    def with_alpha(self, alpha: float) -> "WatermarkKey":
        return WatermarkKey(self.seed, alpha, self.chips_per_bit, self.midband_mask)

    def to_line(self) -> str:
        mask = ";".join(f"{r},{c}" for r, c in self.midband_mask)
        # repr() of a float is the shortest string that round-trips exactly
        return f"v1 seed={self.seed} alpha={self.alpha!r} n={self.chips_per_bit} mask={mask}"

    @classmethod
    def from_line(cls, line: str) -> "WatermarkKey":
        parts = line.strip().split()
        if not parts or parts[0] != "v1":
            raise InvalidKeyError(f"unsupported key record: {line!r}")
        fields = {}
        for part in parts[1:]:
            name, sep, value = part.partition("=")
            if not sep or name in fields:
                raise InvalidKeyError(f"malformed key field {part!r}")
            fields[name] = value
        if set(fields) != {"seed", "alpha", "n", "mask"}:
            raise InvalidKeyError(f"key record needs seed, alpha, n and mask: {line!r}")
        if not re.fullmatch(r"\d+", fields["seed"]) or not re.fullmatch(r"\d+", fields["n"]):
            raise InvalidKeyError(f"seed and n must be decimal integers: {line!r}")
        try:
            alpha = float(fields["alpha"])
            mask = tuple(
                tuple(int(v) for v in item.split(","))
                for item in fields["mask"].split(";")
            )
        except ValueError as exc:
            raise InvalidKeyError(f"malformed key record: {line!r}") from exc
        if any(len(m) != 2 for m in mask):
            raise InvalidKeyError(f"mask entries must be r,c pairs: {fields['mask']!r}")
        return cls(int(fields["seed"]), alpha, int(fields["n"]), mask)

    def save(self, path) -> None:
        Path(path).write_text(self.to_line() + "\n", encoding="ascii", newline="\n")

    @classmethod
    def load(cls, path) -> "WatermarkKey":
        return cls.from_line(Path(path).read_text(encoding="ascii"))


@dataclass(frozen=True)
class LaplacianModel:
    """Host/noise Laplacian scales, pdf ``exp(-|t|/b) / (2b)``.

    Rates (``lambda = 1/scale``) are only a view at the boundary.
    """

    scale_x: float
    scale_n: float | None = None

    def __post_init__(self):
        if not self.scale_x > 0:
            raise ValueError(f"scale_x must be positive, got {self.scale_x}")
        if self.scale_n is not None and not self.scale_n > 0:
            raise ValueError(f"scale_n must be positive, got {self.scale_n}")

    @property
    def rate_x(self) -> float:
        return 1.0 / self.scale_x

    @property
    def rate_n(self) -> float | None:
        return None if self.scale_n is None else 1.0 / self.scale_n

    @classmethod
    def from_rates(cls, rate_x: float, rate_n: float | None = None) -> "LaplacianModel":
        return cls(1.0 / rate_x, None if rate_n is None else 1.0 / rate_n)


def as_gray_image(data) -> np.ndarray:
    """Validate and return an 8-bit grayscale image array."""
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if np.issubdtype(arr.dtype, np.floating) and not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite values")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("intensities must lie in [0, 255]")
        if not np.array_equal(arr, np.round(arr)):
            raise ValueError("intensities must be integers")
        arr = arr.astype(np.uint8)
    return arr


def crop_box(shape) -> tuple[slice, slice]:
    """Centered region whose sides are multiples of the block size."""
    h, w = shape
    hh, ww = h - h % BLOCK, w - w % BLOCK
    top, left = (h - hh) // 2, (w - ww) // 2
    return slice(top, top + hh), slice(left, left + ww)


def num_blocks(shape) -> int:
    h, w = shape
    if h % BLOCK or w % BLOCK:
        raise ValueError(f"image dimensions {shape} are not divisible by {BLOCK}")
    return (h // BLOCK) * (w // BLOCK)


def validate_key(key: WatermarkKey, image_dims) -> int:
    """Number of payload bits that fit in an image of ``image_dims`` (h, w)."""
    total = num_blocks(image_dims) * len(key.midband_mask)
    capacity = total // key.chips_per_bit
    if capacity == 0:
        raise CapacityError(
            f"zero capacity: {total} mid-band coefficients < {key.chips_per_bit} chips per bit"
        )
    return capacity


def bits_from_hex(text: str, nbits: int | None = None) -> np.ndarray:
    """Parse a hex string (MSB first) or a ``bin:``-prefixed binary string.

    Binary needs its own prefix because ``0b...`` is also valid hex.
    """
    s = text.strip().lower()
    if s.startswith("bin:"):
        digits = s[4:]
        if not digits or set(digits) - {"0", "1"}:
            raise ValueError(f"bad binary payload {text!r}")
        bits = np.array([int(d) for d in digits], dtype=np.uint8)
    else:
        if s.startswith("0x"):
            s = s[2:]
        if not s or not re.fullmatch(r"[0-9a-f]+", s):
            raise ValueError(f"bad hex payload {text!r}")
        bits = np.array([(int(d, 16) >> (3 - k)) & 1 for d in s for k in range(4)], dtype=np.uint8)
    if nbits is not None:
        if nbits > bits.size:
            raise ValueError(f"payload has {bits.size} bits, {nbits} requested")
        bits = bits[:nbits]
    return bits


def bits_to_hex(bits) -> str:
    """Hex string, MSB first; the tail is zero-padded to a full nibble."""
    b = np.asarray(bits, dtype=np.uint8).ravel()
    pad = (-b.size) % 4
    b = np.concatenate([b, np.zeros(pad, dtype=np.uint8)])
    nibbles = b.reshape(-1, 4) @ np.array([8, 4, 2, 1])
    return "".join(f"{v:x}" for v in nibbles)


def as_bits(bits) -> np.ndarray:
    b = np.asarray(bits).ravel()
    if b.size and not np.all((b == 0) | (b == 1)):
        raise ValueError("payload bits must be 0 or 1")
    return b.astype(np.uint8)
