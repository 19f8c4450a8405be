"""Multiplicative spread-spectrum image watermarking with Laplacian ML decoding."""

from .core import DEFAULT_MASK, CapacityError, InvalidKeyError, LaplacianModel, WatermarkKey, validate_key
from .decoder import (
    DecisionTrace,
    decode_clean,
    decode_gaussian_baseline,
    decode_llr_oracle,
    decode_noisy,
    extract_image,
)
from .embedder import EmbedResult, embed_image, embed_stream

__all__ = [
    "DEFAULT_MASK",
    "CapacityError",
    "DecisionTrace",
    "EmbedResult",
    "InvalidKeyError",
    "LaplacianModel",
    "WatermarkKey",
    "decode_clean",
    "decode_gaussian_baseline",
    "decode_llr_oracle",
    "decode_noisy",
    "embed_image",
    "embed_stream",
    "extract_image",
    "validate_key",
]
