"""Domain types for Gaussian splat scenes and posed pinhole cameras.

Conventions used throughout the package:

- world_to_camera is a 4x4 rigid transform; camera space is x-right,
  y-down, z-forward (OpenCV style).  A world point p maps to
  ``R @ p + t`` with ``R = world_to_camera[:3, :3]``.
- Image coordinates: pixel (row j, col k) is sampled at the continuous
  point ``(u, v) = (k + 0.5, j + 0.5)``; ``u = fx * x/z + cx``.
- Quaternions are stored (w, x, y, z) and normalized on construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

# Low-pass dilation added to the projected 2D covariance diagonal (px^2)
# and the alpha ceiling, both adopted from the reference splatting stack.
COV2D_DILATION = 0.3
ALPHA_CLAMP = 0.99
DEGENERATE_DET = 1e-12
DEFAULT_NEAR_CLIP = 0.01


class SceneFormatError(ValueError):
    """A scene file violates the expected structure (header, properties)."""


class SceneDataError(ValueError):
    """A scene file parses but carries invalid values (NaN, zero quaternion)."""


@dataclass
class Gaussian:
    """A single anisotropic 3D Gaussian primitive.

    ``scale`` holds per-axis standard deviations in world units (already
    activated, strictly positive); ``opacity`` is in [0, 1].  ``color_dc``
    keeps the raw DC spherical-harmonics coefficients when present; it is
    preview-only and never enters segmentation.
    """

    center: np.ndarray
    rotation: np.ndarray
    scale: np.ndarray
    opacity: float
    color_dc: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.center = np.asarray(self.center, dtype=np.float64).reshape(3)
        self.scale = np.asarray(self.scale, dtype=np.float64).reshape(3)
        q = np.asarray(self.rotation, dtype=np.float64).reshape(4)
        norm = float(np.linalg.norm(q))
        if not norm > 0.0 or not np.isfinite(norm):
            raise SceneDataError("quaternion has zero or non-finite norm")
        self.rotation = q / norm
        if self.color_dc is not None:
            self.color_dc = np.asarray(self.color_dc, dtype=np.float64).reshape(3)
        if not np.all(self.scale > 0.0):
            raise SceneDataError(f"scale must be strictly positive, got {self.scale}")
        if not (0.0 <= self.opacity <= 1.0):
            raise SceneDataError(f"opacity must lie in [0, 1], got {self.opacity}")


class GaussianScene:
    """An ordered collection of Gaussians stored as packed arrays.

    Gaussian indices 0..N-1 are stable identifiers used by every
    downstream matrix.  Instances are read-only after construction and
    safe for concurrent reads.
    """

    def __init__(
        self,
        means: np.ndarray,
        rotations: np.ndarray,
        scales: np.ndarray,
        opacities: np.ndarray,
        colors_dc: Optional[np.ndarray] = None,
        source_path: str = "",
    ) -> None:
        self.means = np.asarray(means, dtype=np.float64).reshape(-1, 3)
        n = self.means.shape[0]
        self.rotations = np.asarray(rotations, dtype=np.float64).reshape(n, 4)
        self.scales = np.asarray(scales, dtype=np.float64).reshape(n, 3)
        self.opacities = np.asarray(opacities, dtype=np.float64).reshape(n)
        self.colors_dc = (
            None if colors_dc is None
            else np.asarray(colors_dc, dtype=np.float64).reshape(n, 3)
        )
        self.source_path = source_path

        norms = np.linalg.norm(self.rotations, axis=1)
        if np.any(norms <= 0.0) or not np.all(np.isfinite(norms)):
            bad = int(np.argmin(np.where(np.isfinite(norms), norms, -1.0)))
            raise SceneDataError(f"quaternion {bad} has zero or non-finite norm")
        self.rotations = self.rotations / norms[:, None]
        if not np.all(self.scales > 0.0):
            bad = int(np.argwhere(~np.all(self.scales > 0.0, axis=1))[0, 0])
            raise SceneDataError(f"gaussian {bad} has non-positive scale")
        if np.any(self.opacities < 0.0) or np.any(self.opacities > 1.0):
            bad = int(np.argwhere(
                (self.opacities < 0.0) | (self.opacities > 1.0))[0, 0])
            raise SceneDataError(f"gaussian {bad} has opacity outside [0, 1]")

    def __len__(self) -> int:
        return self.means.shape[0]

    @property
    def num_gaussians(self) -> int:
        return self.means.shape[0]

    def gaussian(self, index: int) -> Gaussian:
        """Materialize a single Gaussian by its stable index."""
        color = None if self.colors_dc is None else self.colors_dc[index]
        return Gaussian(
            center=self.means[index],
            rotation=self.rotations[index],
            scale=self.scales[index],
            opacity=float(self.opacities[index]),
            color_dc=color,
        )

    @property
    def gaussians(self) -> list[Gaussian]:
        return [self.gaussian(i) for i in range(len(self))]

    @classmethod
    def from_gaussians(
        cls, gaussians: Iterable[Gaussian], source_path: str = ""
    ) -> "GaussianScene":
        gs = list(gaussians)
        colors = None
        if gs and all(g.color_dc is not None for g in gs):
            colors = np.stack([g.color_dc for g in gs])
        return cls(
            means=np.stack([g.center for g in gs]) if gs else np.zeros((0, 3)),
            rotations=np.stack([g.rotation for g in gs]) if gs else np.zeros((0, 4)),
            scales=np.stack([g.scale for g in gs]) if gs else np.zeros((0, 3)),
            opacities=np.array([g.opacity for g in gs]),
            colors_dc=colors,
            source_path=source_path,
        )

    def subset(self, indices: np.ndarray, source_path: str = "") -> "GaussianScene":
        """New scene containing the given rows, in the given order."""
        idx = np.asarray(indices)
        return GaussianScene(
            means=self.means[idx],
            rotations=self.rotations[idx],
            scales=self.scales[idx],
            opacities=self.opacities[idx],
            colors_dc=None if self.colors_dc is None else self.colors_dc[idx],
            source_path=source_path or self.source_path,
        )


@dataclass
class CameraView:
    """A posed pinhole view. No distortion model; inputs are assumed rectified."""

    view_id: int
    width: int
    height: int
    fx: float
    fy: float
    cx: float
    cy: float
    world_to_camera: np.ndarray
    near_clip: float = DEFAULT_NEAR_CLIP

    def __post_init__(self) -> None:
        self.world_to_camera = np.asarray(
            self.world_to_camera, dtype=np.float64).reshape(4, 4)
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dimensions must be >= 1, got "
                             f"{self.width}x{self.height}")
        if self.fx <= 0.0 or self.fy <= 0.0:
            raise ValueError(f"focal lengths must be positive, got "
                             f"fx={self.fx}, fy={self.fy}")
        r = self.world_to_camera[:3, :3]
        if not np.allclose(r @ r.T, np.eye(3), atol=1e-5):
            raise ValueError(
                f"view {self.view_id}: rotation block is not orthonormal")

    @property
    def rotation(self) -> np.ndarray:
        return self.world_to_camera[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.world_to_camera[:3, 3]

    @property
    def camera_center(self) -> np.ndarray:
        """Camera origin in world coordinates."""
        return -self.rotation.T @ self.translation


@dataclass
class ProjectedGaussian:
    """A 2D splat: the image-plane footprint of one Gaussian in one view."""

    gaussian_index: int
    mean2d: np.ndarray
    inv_cov2d: np.ndarray
    depth: float
    radius: int


@dataclass
class ProjectionStats:
    """Culling diagnostics for one projection pass."""

    n_input: int = 0
    n_emitted: int = 0
    n_behind: int = 0
    n_degenerate: int = 0
    n_offscreen: int = 0


def quaternion_to_rotation(q: np.ndarray) -> np.ndarray:
    """Rotation matrices from unit quaternions (w, x, y, z); batched (..., 4)."""
    q = np.asarray(q, dtype=np.float64)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty(q.shape[:-1] + (3, 3), dtype=np.float64)
    out[..., 0, 0] = 1.0 - 2.0 * (y * y + z * z)
    out[..., 0, 1] = 2.0 * (x * y - w * z)
    out[..., 0, 2] = 2.0 * (x * z + w * y)
    out[..., 1, 0] = 2.0 * (x * y + w * z)
    out[..., 1, 1] = 1.0 - 2.0 * (x * x + z * z)
    out[..., 1, 2] = 2.0 * (y * z - w * x)
    out[..., 2, 0] = 2.0 * (x * z - w * y)
    out[..., 2, 1] = 2.0 * (y * z + w * x)
    out[..., 2, 2] = 1.0 - 2.0 * (x * x + y * y)
    return out


def covariance_3d(rotations: np.ndarray, scales: np.ndarray) -> np.ndarray:
    """World-space covariance R diag(s)^2 R^T for batched quats/scales."""
    r = quaternion_to_rotation(rotations)
    m = r * scales[..., None, :]
    return m @ np.swapaxes(m, -1, -2)


def _project_arrays(
    means: np.ndarray,
    rotations: np.ndarray,
    scales: np.ndarray,
    view: CameraView,
):
    """Vectorized projection core shared by the scalar and batch entry points.

    Returns (valid, mean2d, inv_cov, depth, radius, stats) where inv_cov is
    packed as (a, b, c) for the symmetric conic [[a, b], [b, c]].
    """
    n = means.shape[0]
    stats = ProjectionStats(n_input=n)
    rot = view.rotation
    cam = means @ rot.T + view.translation
    z = cam[:, 2]
    alive = z > view.near_clip
    stats.n_behind = int(n - alive.sum())

    # Guard the perspective divide for culled entries.
    zs = np.where(alive, z, 1.0)
    x, y = cam[:, 0], cam[:, 1]
    mean2d = np.stack(
        [view.fx * x / zs + view.cx, view.fy * y / zs + view.cy], axis=1)

    sigma = covariance_3d(rotations, scales)
    sigma_cam = rot @ sigma @ rot.T

    j = np.zeros((n, 2, 3), dtype=np.float64)
    j[:, 0, 0] = view.fx / zs
    j[:, 0, 2] = -view.fx * x / (zs * zs)
    j[:, 1, 1] = view.fy / zs
    j[:, 1, 2] = -view.fy * y / (zs * zs)
    cov2d = j @ sigma_cam @ np.swapaxes(j, 1, 2)
    a = cov2d[:, 0, 0] + COV2D_DILATION
    b = cov2d[:, 0, 1]
    c = cov2d[:, 1, 1] + COV2D_DILATION

    det = a * c - b * b
    degenerate = alive & (det <= DEGENERATE_DET)
    stats.n_degenerate = int(degenerate.sum())
    alive &= ~degenerate

    det_safe = np.where(det > DEGENERATE_DET, det, 1.0)
    inv = np.stack([c / det_safe, -b / det_safe, a / det_safe], axis=1)

    mid = 0.5 * (a + c)
    disc = np.sqrt(np.maximum(0.25 * (a - c) ** 2 + b * b, 0.0))
    lam_max = np.maximum(mid + disc, 0.0)
    radius = np.ceil(3.0 * np.sqrt(lam_max)).astype(np.int64)

    offscreen = alive & (
        (mean2d[:, 0] + radius < 0.0)
        | (mean2d[:, 0] - radius > view.width)
        | (mean2d[:, 1] + radius < 0.0)
        | (mean2d[:, 1] - radius > view.height)
    )
    stats.n_offscreen = int(offscreen.sum())
    alive &= ~offscreen
    stats.n_emitted = int(alive.sum())
    return alive, mean2d, inv, z, radius, stats


def project_gaussian(g: Gaussian, view: CameraView) -> Optional[ProjectedGaussian]:
    """Project one Gaussian into a view; None when culled.

    The camera-space covariance goes through the perspective Jacobian
    (first-order EWA) and gets a +0.3 px^2 diagonal dilation; the reported
    radius is the ceil of 3 sigma of the widest principal axis.
    """
    alive, mean2d, inv, z, radius, _ = _project_arrays(
        g.center[None, :], g.rotation[None, :], g.scale[None, :], view)
    if not alive[0]:
        return None
    a, b, c = inv[0]
    return ProjectedGaussian(
        gaussian_index=0,
        mean2d=mean2d[0],
        inv_cov2d=np.array([[a, b], [b, c]]),
        depth=float(z[0]),
        radius=int(radius[0]),
    )


def project_scene(
    scene: GaussianScene,
    view: CameraView,
    member_mask: Optional[np.ndarray] = None,
) -> tuple[list[ProjectedGaussian], ProjectionStats]:
    """Project a whole scene (optionally a member subset) into one view.

    Deterministic; returned splats keep ascending gaussian_index order and
    carry the original scene indices.
    """
    if member_mask is None:
        indices = np.arange(len(scene))
    else:
        member_mask = np.asarray(member_mask, dtype=bool).reshape(len(scene))
        indices = np.flatnonzero(member_mask)
    alive, mean2d, inv, z, radius, stats = _project_arrays(
        scene.means[indices], scene.rotations[indices],
        scene.scales[indices], view)
    out: list[ProjectedGaussian] = []
    for row in np.flatnonzero(alive):
        a, b, c = inv[row]
        out.append(ProjectedGaussian(
            gaussian_index=int(indices[row]),
            mean2d=mean2d[row],
            inv_cov2d=np.array([[a, b], [b, c]]),
            depth=float(z[row]),
            radius=int(radius[row]),
        ))
    return out, stats


def evaluate_alpha(p: ProjectedGaussian, pixel: np.ndarray, opacity: float) -> float:
    """Splat alpha at a continuous image point, clamped to [0, 0.99].

    Callers treat values below 1/255 as zero; that floor lives in the
    blend configuration, not here.
    """
    d = np.asarray(pixel, dtype=np.float64) - p.mean2d
    q = float(d @ p.inv_cov2d @ d)
    return min(opacity * math.exp(-0.5 * q), ALPHA_CLAMP)


def load_cameras(path: str | Path) -> list[CameraView]:
    """Read the per-scene camera JSON (array of view objects)."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise SceneFormatError(f"{path}: camera file must be a JSON array")
    views = []
    for entry in raw:
        try:
            views.append(CameraView(
                view_id=int(entry["view_id"]),
                width=int(entry["width"]),
                height=int(entry["height"]),
                fx=float(entry["fx"]),
                fy=float(entry["fy"]),
                cx=float(entry["cx"]),
                cy=float(entry["cy"]),
                world_to_camera=np.array(
                    entry["world_to_camera"], dtype=np.float64).reshape(4, 4),
                near_clip=float(entry.get("near_clip", DEFAULT_NEAR_CLIP)),
            ))
        except KeyError as exc:
            raise SceneFormatError(
                f"{path}: camera entry missing field {exc}") from exc
    return views


def save_cameras(path: str | Path, views: Sequence[CameraView]) -> None:
    payload = [
        {
            "view_id": v.view_id,
            "width": v.width,
            "height": v.height,
            "fx": v.fx,
            "fy": v.fy,
            "cx": v.cx,
            "cy": v.cy,
            "world_to_camera": [float(x) for x in v.world_to_camera.ravel()],
            "near_clip": v.near_clip,
        }
        for v in views
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
