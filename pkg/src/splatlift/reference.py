"""Slow reference renderer: per-pixel scalar walks over a full depth sort.

This is the cross-validation oracle for the tile rasterizer and the
scoring backend for the solver's exact objective.  It shares only the
contract-level semantics with the fast path (alpha formula, the tile-box
footprint rule, walk order and floors); everything else — no binning
structures, a single global sort, plain Python per-pixel loops — is
deliberately independent.
"""

from __future__ import annotations

import math

import numpy as np

from .rasterizer import EXACT_BLEND, TILE_SIZE, BlendConfig, RenderOutput
from .scene import ALPHA_CLAMP, CameraView, GaussianScene, project_gaussian


def reference_pixel_weights(
    scene: GaussianScene,
    view: CameraView,
    blend: BlendConfig = EXACT_BLEND,
    member_mask: np.ndarray | None = None,
) -> np.ndarray:
    """Per-pixel blend weights w[j, k, i] = alpha_i * T_i.

    The rendered value of any channel x is exactly ``w @ x`` because the
    walk's alpha and transmittance never depend on the channel.  Rows for
    culled or skipped Gaussians are zero.  Intended for small scenes; the
    output is H x W x N.
    """
    n = len(scene)
    splats = []
    for i in range(n):
        if member_mask is not None and not member_mask[i]:
            continue
        p = project_gaussian(scene.gaussian(i), view)
        if p is not None:
            p.gaussian_index = i
            splats.append(p)
    splats.sort(key=lambda p: (p.depth, p.gaussian_index))

    weights = np.zeros((view.height, view.width, n), dtype=np.float64)
    for j in range(view.height):
        v = j + 0.5
        tyj = j // TILE_SIZE
        for k in range(view.width):
            u = k + 0.5
            txk = k // TILE_SIZE
            trans = 1.0
            for p in splats:
                # Same footprint rule as binning: the splat reaches this
                # pixel iff its radius box overlaps the pixel's tile.
                r = p.radius
                if (math.floor((p.mean2d[0] - r) / TILE_SIZE) > txk
                        or math.floor((p.mean2d[0] + r) / TILE_SIZE) < txk
                        or math.floor((p.mean2d[1] - r) / TILE_SIZE) > tyj
                        or math.floor((p.mean2d[1] + r) / TILE_SIZE) < tyj):
                    continue
                du = u - p.mean2d[0]
                dv = v - p.mean2d[1]
                q = (p.inv_cov2d[0, 0] * du * du
                     + 2.0 * p.inv_cov2d[0, 1] * du * dv
                     + p.inv_cov2d[1, 1] * dv * dv)
                alpha = min(
                    scene.opacities[p.gaussian_index] * math.exp(-0.5 * q),
                    ALPHA_CLAMP)
                if blend.alpha_floor > 0.0 and alpha < blend.alpha_floor:
                    continue
                weights[j, k, p.gaussian_index] = alpha * trans
                trans *= 1.0 - alpha
                if (blend.transmittance_floor > 0.0
                        and trans < blend.transmittance_floor):
                    break
    return weights


def reference_render(
    scene: GaussianScene,
    view: CameraView,
    channel: np.ndarray | None = None,
    blend: BlendConfig = EXACT_BLEND,
    member_mask: np.ndarray | None = None,
) -> RenderOutput:
    """Assemble RenderOutput from reference weights (linear in the channel)."""
    weights = reference_pixel_weights(scene, view, blend, member_mask)
    value = None
    if channel is not None:
        channel = np.asarray(channel, dtype=np.float64)
        value = weights @ channel
    rho = weights.sum(axis=2)
    depths = np.zeros(len(scene), dtype=np.float64)
    cam_z = scene.means @ view.rotation.T + view.translation
    depths[:] = cam_z[:, 2]
    depth_acc = weights @ depths
    depth = np.zeros_like(rho)
    np.divide(depth_acc, rho, out=depth, where=rho > 0.0)
    return RenderOutput(value=value, alpha=rho, depth=depth)
