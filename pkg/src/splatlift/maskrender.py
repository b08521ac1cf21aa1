"""Render a 3D assignment back to 2D masks on arbitrary views.

Binary mode quantizes the foreground subset's accumulated alpha at a
threshold tau.  Scene mode renders every object subset separately and, at
pixels where several objects pass the threshold, keeps the one with the
smallest blended depth (ties go to the smaller object ID).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rasterizer import (
    DEFAULT_BLEND,
    BlendConfig,
    bin_gaussians_to_tiles,
    render_property,
    render_subset_alpha_depth,
)
from .scene import CameraView, GaussianScene, project_scene
from .solver import Assignment

DEFAULT_TAU = 0.1


@dataclass
class RenderedMask:
    """A rendered label map with the parameters that produced it."""

    view_id: int
    labels: np.ndarray
    gamma: float
    tau: float


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    return tau


def render_binary_mask(
    scene: GaussianScene,
    assignment: Assignment,
    view: CameraView,
    tau: float = DEFAULT_TAU,
    blend: BlendConfig = DEFAULT_BLEND,
) -> RenderedMask:
    """Quantized foreground-subset alpha: label 1 where alpha exceeds tau."""
    tau = _check_tau(tau)
    if assignment.mode != "binary":
        raise ValueError("render_binary_mask requires a binary assignment")
    out = render_subset_alpha_depth(scene, view, assignment.members(1), blend)
    labels = np.zeros((view.height, view.width), dtype=np.uint16)
    labels[out.alpha > tau] = 1
    return RenderedMask(view_id=view.view_id, labels=labels,
                        gamma=assignment.gamma, tau=tau)


def render_scene_mask(
    scene: GaussianScene,
    assignment: Assignment,
    view: CameraView,
    tau: float = DEFAULT_TAU,
    blend: BlendConfig = DEFAULT_BLEND,
) -> RenderedMask:
    """Depth-guided multi-object mask on one view.

    Object subsets share a single projection pass per view; only the
    binning and blending run per object.
    """
    tau = _check_tau(tau)
    if assignment.mode != "scene":
        raise ValueError("render_scene_mask requires a scene assignment")
    projected, _ = project_scene(scene, view)
    by_index = {p.gaussian_index: p for p in projected}

    labels = np.zeros((view.height, view.width), dtype=np.uint16)
    best_depth = np.full((view.height, view.width), np.inf, dtype=np.float64)
    for obj in range(1, assignment.num_objects):
        member = assignment.members(obj)
        if not member.any():
            continue
        subset = [by_index[i] for i in np.flatnonzero(member) if i in by_index]
        binning = bin_gaussians_to_tiles(subset, view)
        out = render_property(scene, binning, view, None, blend)
        qualified = out.alpha > tau
        # Strict < keeps the earlier (smaller) object ID on exact depth ties.
        wins = qualified & (out.depth < best_depth)
        labels[wins] = obj
        best_depth[wins] = out.depth[wins]
    return RenderedMask(view_id=view.view_id, labels=labels,
                        gamma=assignment.gamma, tau=tau)
