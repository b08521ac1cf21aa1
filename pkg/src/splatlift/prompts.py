"""Point-prompt geometry: pixel -> source Gaussian -> other views.

A clicked pixel is resolved to the Gaussian whose center best explains it
(near the back-projected ray, smallest positive depth), and that center is
reprojected into other views so an external mask generator receives
consistent prompts per view.  "Closest" is measured as perpendicular
distance from the center to the pixel's ray, which sidesteps having to
pick a back-projection depth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .scene import CameraView, GaussianScene

TOP_K = 10


@dataclass
class PointPrompt:
    view_id: int
    pixel: np.ndarray
    gaussian_index: Optional[int] = None

    def __post_init__(self) -> None:
        self.pixel = np.asarray(self.pixel, dtype=np.float64).reshape(2)


@dataclass
class PropagatedPrompt:
    """A prompt reprojected into one view; visible=False marks
    behind-camera or out-of-frame projections (reported, never dropped)."""

    view_id: int
    x: Optional[float]
    y: Optional[float]
    visible: bool


def backproject_prompt(
    scene: GaussianScene, view: CameraView, pixel: np.ndarray
) -> int:
    """Resolve a pixel prompt to its source Gaussian index.

    Among the TOP_K centers nearest (perpendicular L2) to the pixel's
    back-projected ray, returns the one with the smallest positive camera
    depth; only positive-depth Gaussians are candidates.
    """
    pixel = np.asarray(pixel, dtype=np.float64).reshape(2)
    if not (0.0 <= pixel[0] <= view.width and 0.0 <= pixel[1] <= view.height):
        raise ValueError(
            f"prompt pixel {pixel.tolist()} outside view {view.view_id} bounds")
    cam_z = (scene.means @ view.rotation.T + view.translation)[:, 2]
    in_front = cam_z > 0.0
    if not in_front.any():
        raise LookupError(
            f"no Gaussian has positive depth in view {view.view_id}")

    origin = view.camera_center
    dir_cam = np.array([
        (pixel[0] - view.cx) / view.fx,
        (pixel[1] - view.cy) / view.fy,
        1.0,
    ])
    direction = view.rotation.T @ dir_cam
    direction /= np.linalg.norm(direction)

    rel = scene.means - origin
    along = rel @ direction
    perp = rel - along[:, None] * direction[None, :]
    dist = np.linalg.norm(perp, axis=1)

    candidates = np.flatnonzero(in_front)
    k = min(TOP_K, candidates.size)
    nearest = candidates[np.argsort(dist[candidates], kind="stable")[:k]]
    best = nearest[np.argmin(cam_z[nearest])]
    return int(best)


def project_prompts_to_views(
    scene: GaussianScene,
    gaussian_index: int,
    views: Sequence[CameraView],
) -> list[PropagatedPrompt]:
    """Project one Gaussian's center into each view."""
    if not 0 <= gaussian_index < len(scene):
        raise ValueError(f"gaussian index {gaussian_index} out of range")
    center = scene.means[gaussian_index]
    out = []
    for view in views:
        cam = view.rotation @ center + view.translation
        if cam[2] <= 0.0:
            out.append(PropagatedPrompt(view.view_id, None, None, False))
            continue
        u = view.fx * cam[0] / cam[2] + view.cx
        v = view.fy * cam[1] / cam[2] + view.cy
        visible = 0.0 <= u < view.width and 0.0 <= v < view.height
        out.append(PropagatedPrompt(view.view_id, float(u), float(v), visible))
    return out


def load_prompts(path: str | Path) -> list[PointPrompt]:
    """Prompt file: JSON array of {view_id, x, y}."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return [PointPrompt(view_id=int(p["view_id"]),
                        pixel=(float(p["x"]), float(p["y"]))) for p in raw]


def save_propagated(path: str | Path,
                    prompts: Sequence[PropagatedPrompt]) -> None:
    payload = [
        {"view_id": p.view_id, "x": p.x, "y": p.y, "visible": p.visible}
        for p in prompts
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
