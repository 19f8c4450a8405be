"""Grayscale image files: binary PGM natively, everything else through Pillow."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
from PIL import Image

from .core import as_gray_image

_PGM_HEADER = re.compile(rb"P5\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s")


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    m = _PGM_HEADER.match(raw)
    if not m:
        raise ValueError(f"{path}: not a binary (P5) PGM file")
    width, height, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM (maxval 255) is supported, got {maxval}")
    data = np.frombuffer(raw, dtype=np.uint8, count=width * height, offset=m.end())
    return data.reshape(height, width).copy()


def write_pgm(path, image) -> None:
    img = as_gray_image(image)
    h, w = img.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes())


def read_image(path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() in (".pgm", ".pnm"):
        return read_pgm(path)
    with Image.open(path) as im:
        if im.mode not in ("L", "1", "P"):
            raise ValueError(f"{path}: expected a grayscale image, got mode {im.mode}")
        return np.asarray(im.convert("L"), dtype=np.uint8).copy()


def write_image(path, image) -> None:
    path = Path(path)
    if path.suffix.lower() in (".pgm", ".pnm"):
        write_pgm(path, image)
    else:
        Image.fromarray(as_gray_image(image)).save(path)


IMAGE_SUFFIXES = (".pgm", ".pnm", ".png", ".bmp", ".tif", ".tiff")


def list_images(directory) -> list[Path]:
    return sorted(p for p in Path(directory).iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
