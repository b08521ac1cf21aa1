"""Accumulation of per-(label, Gaussian) blend mass into the E x N matrix.

One rasterization pass per masked view: every pixel runs the ordinary
blending walk, and each surviving sample's ``alpha * T`` lands in the row
of that pixel's mask label.  The resulting matrix is the sufficient
statistic for the closed-form label solver.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .rasterizer import (
    DEFAULT_BLEND,
    BlendConfig,
    bin_gaussians_to_tiles,
    _tile_pixel_grid,
)
from .scene import ALPHA_CLAMP, CameraView, GaussianScene, project_scene

MATRIX_MAGIC = b"FSA1"


@dataclass
class LabelMask:
    """Integer object-ID map for one view; 0 is background."""

    view_id: int
    labels: np.ndarray

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=np.uint16)
        if self.labels.ndim != 2:
            raise ValueError("mask labels must be a 2D grid")

    @property
    def num_objects(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 1


@dataclass
class ContributionMatrix:
    """Dense E x N float32 matrix of accumulated alpha*T mass per label."""

    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.ascontiguousarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValueError("contribution matrix must be 2D (E x N)")

    @property
    def num_objects(self) -> int:
        return self.values.shape[0]

    @property
    def num_gaussians(self) -> int:
        return self.values.shape[1]

    @property
    def observed(self) -> np.ndarray:
        """Per-Gaussian flag: column carries any mass at all."""
        return self.values.sum(axis=0, dtype=np.float64) > 0.0

    def save(self, path: str | Path) -> None:
        e, n = self.values.shape
        with open(path, "wb") as fh:
            fh.write(MATRIX_MAGIC)
            fh.write(struct.pack("<II", e, n))
            self.values.tofile(fh)

    @classmethod
    def load(cls, path: str | Path) -> "ContributionMatrix":
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != MATRIX_MAGIC:
                raise ValueError(f"{path}: bad magic {magic!r}")
            e, n = struct.unpack("<II", fh.read(8))
            data = np.fromfile(fh, dtype=np.float32, count=e * n)
        if data.size != e * n:
            raise ValueError(f"{path}: truncated contribution matrix")
        return cls(values=data.reshape(e, n))


def accumulate_contributions(
    scene: GaussianScene,
    views: Sequence[tuple[CameraView, LabelMask]],
    num_objects: int,
    blend: BlendConfig = DEFAULT_BLEND,
) -> ContributionMatrix:
    """Scatter every pixel's surviving alpha*T samples into label rows.

    Views are processed in the given order and per-view partial matrices
    are reduced in that same fixed order, so the result is deterministic.
    """
    n = len(scene)
    total = np.zeros((num_objects, n), dtype=np.float64)
    for view, mask in views:
        if mask.labels.shape != (view.height, view.width):
            raise ValueError(
                f"view {view.view_id}: mask shape {mask.labels.shape} does not "
                f"match view dimensions {(view.height, view.width)}")
        top = int(mask.labels.max()) if mask.labels.size else 0
        if top >= num_objects:
            j, k = np.unravel_index(
                int(np.argmax(mask.labels)), mask.labels.shape)
            raise ValueError(
                f"view {view.view_id}: label {top} at pixel ({j}, {k}) "
                f"exceeds object count {num_objects}")
        total += _accumulate_view(scene, view, mask, num_objects, blend)
    return ContributionMatrix(values=total.astype(np.float32))


def _accumulate_view(
    scene: GaussianScene,
    view: CameraView,
    mask: LabelMask,
    num_objects: int,
    blend: BlendConfig,
) -> np.ndarray:
    projected, _ = project_scene(scene, view)
    binning = bin_gaussians_to_tiles(projected, view)
    part = np.zeros((num_objects, len(scene)), dtype=np.float64)
    opac = scene.opacities
    labels = mask.labels

    for ty in range(binning.tiles_y):
        for tx in range(binning.tiles_x):
            splats = binning.tile_lists[ty * binning.tiles_x + tx]
            if len(splats) == 0:
                continue
            x0, y0, x1, y1, us, vs = _tile_pixel_grid(view, tx, ty)
            tile_labels = labels[y0:y1, x0:x1].ravel().astype(np.int64)
            trans = np.ones((y1 - y0, x1 - x0), dtype=np.float64)
            active = np.ones_like(trans, dtype=bool)
            for s in splats:
                du = us - binning.means2d[s, 0]
                dv = vs - binning.means2d[s, 1]
                a, b, c = binning.inv_cov[s]
                power = -0.5 * (a * du * du + c * dv * dv) - b * du * dv
                alpha = np.minimum(
                    opac[binning.indices[s]] * np.exp(power), ALPHA_CLAMP)
                use = active & (alpha >= blend.alpha_floor) if \
                    blend.alpha_floor > 0.0 else active
                wgt = np.where(use, alpha * trans, 0.0)
                if np.any(wgt > 0.0):
                    part[:, binning.indices[s]] += np.bincount(
                        tile_labels, weights=wgt.ravel(),
                        minlength=num_objects)
                trans = np.where(use, trans * (1.0 - alpha), trans)
                if blend.transmittance_floor > 0.0:
                    active &= trans >= blend.transmittance_floor
                    if not active.any():
                        break
    return part
