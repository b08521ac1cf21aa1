"""Tile-based forward rasterizer for per-Gaussian property channels.

The image is split into 16x16 tiles; each tile owns a depth-sorted list of
the splats whose 3-sigma box overlaps it, and every pixel of the tile
walks that list front to back accumulating ``x_i * alpha_i * T_i``.  The
walk is vectorized over the pixels of a tile, so outputs are
bit-deterministic regardless of scheduling.

Because alpha and transmittance are fixed once the scene is reconstructed,
the rendered value is linear in the property channel; the solver relies on
that, and the acceptance suite checks it directly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .scene import (
    ALPHA_CLAMP,
    CameraView,
    GaussianScene,
    ProjectedGaussian,
    project_scene,
)

TILE_SIZE = 16


@dataclass(frozen=True)
class BlendConfig:
    """Throughput floors of the blending walk.

    ``alpha_floor`` drops splat samples below it (no transmittance update);
    once transmittance falls below ``transmittance_floor`` the pixel's walk
    terminates.  Both default to the reference-pipeline constants and can
    be switched off for oracle comparisons.
    """

    alpha_floor: float = 1.0 / 255.0
    transmittance_floor: float = 1e-4

    @classmethod
    def exact(cls) -> "BlendConfig":
        return cls(alpha_floor=0.0, transmittance_floor=0.0)


DEFAULT_BLEND = BlendConfig()
EXACT_BLEND = BlendConfig.exact()


@dataclass
class RenderOutput:
    """Per-pixel blend results: property value, accumulated alpha, depth.

    ``depth`` is the alpha-blended expected depth normalized by the
    accumulated alpha; it is zero wherever ``alpha`` is zero.
    """

    value: Optional[np.ndarray]
    alpha: np.ndarray
    depth: np.ndarray


class TileBinning:
    """Per-tile, depth-sorted splat lists plus the packed splat arrays."""

    def __init__(self, view: CameraView, projected: Sequence[ProjectedGaussian]):
        self.tiles_x = (view.width + TILE_SIZE - 1) // TILE_SIZE
        self.tiles_y = (view.height + TILE_SIZE - 1) // TILE_SIZE
        k = len(projected)
        self.indices = np.fromiter(
            (p.gaussian_index for p in projected), dtype=np.int64, count=k)
        self.means2d = np.array([p.mean2d for p in projected],
                                dtype=np.float64).reshape(k, 2)
        self.inv_cov = np.array(
            [(p.inv_cov2d[0, 0], p.inv_cov2d[0, 1], p.inv_cov2d[1, 1])
             for p in projected], dtype=np.float64).reshape(k, 3)
        self.depths = np.fromiter(
            (p.depth for p in projected), dtype=np.float64, count=k)
        self.radii = np.fromiter(
            (p.radius for p in projected), dtype=np.int64, count=k)

        lists: list[list[int]] = [[] for _ in range(self.tiles_x * self.tiles_y)]
        # Walk splats in (depth, gaussian_index) order so each tile list
        # comes out sorted with deterministic tie-breaks.
        order = np.lexsort((self.indices, self.depths))
        for s in order:
            tx0, tx1, ty0, ty1 = tile_range(
                self.means2d[s, 0], self.means2d[s, 1], self.radii[s],
                self.tiles_x, self.tiles_y)
            for ty in range(ty0, ty1 + 1):
                base = ty * self.tiles_x
                for tx in range(tx0, tx1 + 1):
                    lists[base + tx].append(s)
        self.tile_lists = [np.array(lst, dtype=np.int64) for lst in lists]

    def tile_count(self, tx: int, ty: int) -> int:
        return len(self.tile_lists[ty * self.tiles_x + tx])


def tile_range(mx: float, my: float, radius: int,
               tiles_x: int, tiles_y: int) -> tuple[int, int, int, int]:
    """Inclusive tile index box covered by a splat's radius box."""
    tx0 = max(0, int(np.floor((mx - radius) / TILE_SIZE)))
    tx1 = min(tiles_x - 1, int(np.floor((mx + radius) / TILE_SIZE)))
    ty0 = max(0, int(np.floor((my - radius) / TILE_SIZE)))
    ty1 = min(tiles_y - 1, int(np.floor((my + radius) / TILE_SIZE)))
    return tx0, tx1, ty0, ty1


def bin_gaussians_to_tiles(
    projected: Sequence[ProjectedGaussian], view: CameraView
) -> TileBinning:
    """Bin projected splats into every 16x16 tile their radius box overlaps."""
    return TileBinning(view, projected)


def _tile_pixel_grid(view: CameraView, tx: int, ty: int):
    x0 = tx * TILE_SIZE
    y0 = ty * TILE_SIZE
    x1 = min(x0 + TILE_SIZE, view.width)
    y1 = min(y0 + TILE_SIZE, view.height)
    us = np.arange(x0, x1, dtype=np.float64) + 0.5
    vs = np.arange(y0, y1, dtype=np.float64) + 0.5
    return x0, y0, x1, y1, us[None, :], vs[:, None]


def render_property(
    scene: GaussianScene,
    binning: TileBinning,
    view: CameraView,
    channel: Optional[np.ndarray],
    blend: BlendConfig = DEFAULT_BLEND,
) -> RenderOutput:
    """Alpha-composite a per-Gaussian channel (scalar or 3-vector) per pixel.

    ``channel=None`` skips value accumulation and returns alpha/depth only.
    """
    vector = False
    if channel is not None:
        channel = np.asarray(channel, dtype=np.float64)
        if channel.shape[0] != len(scene):
            raise ValueError(
                f"channel length {channel.shape[0]} != scene size {len(scene)}")
        vector = channel.ndim == 2

    h, w = view.height, view.width
    value = None
    if channel is not None:
        value = np.zeros((h, w, 3) if vector else (h, w), dtype=np.float64)
    rho = np.zeros((h, w), dtype=np.float64)
    depth_acc = np.zeros((h, w), dtype=np.float64)
    opac = scene.opacities

    for ty in range(binning.tiles_y):
        for tx in range(binning.tiles_x):
            splats = binning.tile_lists[ty * binning.tiles_x + tx]
            if len(splats) == 0:
                continue
            x0, y0, x1, y1, us, vs = _tile_pixel_grid(view, tx, ty)
            trans = np.ones((y1 - y0, x1 - x0), dtype=np.float64)
            active = np.ones_like(trans, dtype=bool)
            v_tile = None
            if channel is not None:
                v_tile = np.zeros(
                    trans.shape + ((3,) if vector else ()), dtype=np.float64)
            r_tile = np.zeros_like(trans)
            d_tile = np.zeros_like(trans)
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
                if channel is not None:
                    x_s = channel[binning.indices[s]]
                    if vector:
                        v_tile += wgt[..., None] * x_s
                    else:
                        v_tile += wgt * x_s
                r_tile += wgt
                d_tile += binning.depths[s] * wgt
                trans = np.where(use, trans * (1.0 - alpha), trans)
                if blend.transmittance_floor > 0.0:
                    active &= trans >= blend.transmittance_floor
                    if not active.any():
                        break
            if channel is not None:
                value[y0:y1, x0:x1] = v_tile
            rho[y0:y1, x0:x1] = r_tile
            depth_acc[y0:y1, x0:x1] = d_tile

    depth = np.zeros_like(rho)
    np.divide(depth_acc, rho, out=depth, where=rho > 0.0)
    return RenderOutput(value=value, alpha=rho, depth=depth)


def render_view(
    scene: GaussianScene,
    view: CameraView,
    channel: Optional[np.ndarray] = None,
    blend: BlendConfig = DEFAULT_BLEND,
) -> RenderOutput:
    """Project, bin, and composite a view in one call."""
    projected, _ = project_scene(scene, view)
    binning = bin_gaussians_to_tiles(projected, view)
    return render_property(scene, binning, view, channel, blend)


def render_subset_alpha_depth(
    scene: GaussianScene,
    view: CameraView,
    member_mask: np.ndarray,
    blend: BlendConfig = DEFAULT_BLEND,
) -> RenderOutput:
    """Accumulated alpha and blended depth of a member subset.

    The whole pipeline (projection, binning, walk) runs over the subset
    only, so transmittance reflects subset-internal occlusion and nothing
    else.
    """
    member_mask = np.asarray(member_mask, dtype=bool).reshape(len(scene))
    projected, _ = project_scene(scene, view, member_mask=member_mask)
    binning = bin_gaussians_to_tiles(projected, view)
    return render_property(scene, binning, view, None, blend)


def save_render_grid(path: str | Path, grid: np.ndarray) -> None:
    """Write a float32 grid with an 8-byte (width, height) LE header."""
    grid = np.asarray(grid, dtype=np.float32)
    h, w = grid.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", w, h))
        grid.tofile(fh)


def load_render_grid(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        w, h = struct.unpack("<II", fh.read(8))
        data = np.fromfile(fh, dtype=np.float32, count=w * h)
    if data.size != w * h:
        raise ValueError(f"{path}: truncated render grid")
    return data.reshape(h, w)
