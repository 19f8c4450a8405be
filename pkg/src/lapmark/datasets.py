"""Reference grayscale dataset assembled from images bundled with PyWavelets
and scikit-image (no network access needed).

None of the classic test images is redistributed here except *Aerial*
(PyWavelets ``aero``); the remaining photographs stand in for the rest.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .imageio import write_pgm

# name -> (source package, loader name)
STANDARD_IMAGES = {
    "aerial": ("pywt", "aero"),
    "ascent": ("pywt", "ascent"),
    "cameraman": ("skimage", "camera"),
    "astronaut": ("skimage", "astronaut"),
}


def _to_gray(a: np.ndarray) -> np.ndarray:
    if a.ndim == 2:
        return a.astype(np.uint8)
    rgb = a[..., :3].astype(np.float64)
    # ITU-R BT.601 luma
    y = rgb @ np.array([0.299, 0.587, 0.114])
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


def load_standard(name: str) -> np.ndarray:
    source, attr = STANDARD_IMAGES[name]
    if source == "pywt":
        import pywt.data
        arr = getattr(pywt.data, attr)()
    else:
        import skimage.data
        arr = getattr(skimage.data, attr)()
    return _to_gray(np.asarray(arr))


def build_standard_dataset(directory, names=None) -> dict[str, Path]:
    """Write the obtainable reference images as PGM files.

    Images whose source package is missing are skipped; the returned mapping
    only lists files that were written.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = {}
    for name in names or STANDARD_IMAGES:
        try:
            img = load_standard(name)
        except ImportError:
            continue
        path = directory / f"{name}.pgm"
        write_pgm(path, img)
        written[name] = path
    return written
