"""16-bit grayscale mask PNG I/O plus an optional color preview writer.

Pixel value equals object ID; this mapping is bit-exact and is the wire
contract for masks. The palette preview is convenience output only.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

# Repeatable palette for preview images: background black, objects in
# saturated distinct colors (cycled beyond 12 objects).
_PALETTE = np.array([
    (0, 0, 0),
    (230, 60, 60), (60, 180, 75), (65, 105, 225), (255, 200, 40),
    (170, 70, 200), (70, 210, 210), (240, 120, 40), (150, 220, 90),
    (220, 90, 160), (110, 110, 255), (160, 120, 60), (90, 90, 90),
], dtype=np.uint8)


def save_mask_png(path: str | Path, labels: np.ndarray) -> None:
    labels = np.ascontiguousarray(labels, dtype=np.uint16)
    Image.fromarray(labels).save(path, format="PNG")  # uint16 -> I;16


def load_mask_png(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode not in ("I;16", "I", "L", "P"):
            raise ValueError(f"{path}: unsupported mask mode {im.mode}")
        arr = np.asarray(im.convert("I"), dtype=np.int32)
    if arr.min() < 0 or arr.max() > np.iinfo(np.uint16).max:
        raise ValueError(f"{path}: mask values outside uint16 range")
    return arr.astype(np.uint16)


def save_mask_preview(path: str | Path, labels: np.ndarray) -> None:
    labels = np.asarray(labels)
    idx = np.where(labels == 0, 0, (labels - 1) % (len(_PALETTE) - 1) + 1)
    rgb = _PALETTE[idx]
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")
