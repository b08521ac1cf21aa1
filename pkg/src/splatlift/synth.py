"""Seeded synthetic fixtures: scenes, ring cameras, and ground-truth masks.

Two presets back the test suite and the CLI:

- ``two-cluster``: two well-separated Gaussian balls; object 1 is the
  foreground ball, the other is background.  Ground-truth masks for every
  view come from rendering the true membership, and only a subset of views
  keeps its mask for training (the fewer-masks regime).
- ``random``: small scenes with noise label masks, used to stress the
  solver against the brute-force oracle.

Densities and opacities of the two-cluster preset are chosen so that no
blending walk terminates early; every Gaussian is then observed in at
least one masked view, which makes exact recovery possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .contributions import LabelMask
from .maskrender import DEFAULT_TAU, render_scene_mask
from .masks import save_mask_png
from .ply import export_ply
from .scene import CameraView, GaussianScene, save_cameras
from .solver import Assignment


@dataclass
class SynthFixture:
    scene: GaussianScene
    views: list[CameraView]
    membership: np.ndarray
    num_objects: int
    masks: dict[int, LabelMask]
    mask_view_ids: list[int] = field(default_factory=list)

    def training_views(self) -> list[tuple[CameraView, LabelMask]]:
        """Views that keep their mask (the solver's input)."""
        return [(v, self.masks[v.view_id]) for v in self.views
                if v.view_id in self.mask_view_ids]

    def heldout_view_ids(self) -> list[int]:
        return [v.view_id for v in self.views
                if v.view_id not in self.mask_view_ids]

    def view(self, view_id: int) -> CameraView:
        for v in self.views:
            if v.view_id == view_id:
                return v
        raise ValueError(f"no view {view_id} in fixture")

    def gt_assignment(self) -> Assignment:
        """Scene assignment built from the true membership."""
        member = np.zeros((self.num_objects, len(self.scene)), dtype=np.uint8)
        for obj in range(1, self.num_objects):
            member[obj] = self.membership == obj
        member[0] = ~member[1:].any(axis=0)
        return Assignment(mode="scene", gamma=0.0, membership=member)


def look_at_w2c(position, target, up=(0.0, 1.0, 0.0)) -> np.ndarray:
    """World-to-camera for a camera at `position` looking at `target`
    (camera basis: x right, y down, z forward)."""
    position = np.asarray(position, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - position
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, np.asarray(up, dtype=np.float64))
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    w2c = np.eye(4)
    w2c[:3, :3] = np.stack([right, down, forward])
    w2c[:3, 3] = -w2c[:3, :3] @ position
    return w2c


def ring_view(
    view_id: int,
    azimuth: float,
    radius: float,
    width: int,
    height: int,
    focal: float,
    elevation: float = 0.0,
    target=(0.0, 0.0, 0.0),
) -> CameraView:
    position = (radius * math.cos(azimuth), elevation, radius * math.sin(azimuth))
    return CameraView(
        view_id=view_id,
        width=width,
        height=height,
        fx=focal,
        fy=focal,
        cx=width / 2.0,
        cy=height / 2.0,
        world_to_camera=look_at_w2c(position, target),
    )


def _gaussian_ball(
    rng: np.random.Generator,
    count: int,
    center: np.ndarray,
    ball_radius: float,
    sigma_range: tuple[float, float],
    opacity_range: tuple[float, float],
):
    direction = rng.normal(size=(count, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    # Cube-root radius produces a uniform density ball.
    r = ball_radius * rng.random(count) ** (1.0 / 3.0)
    means = center + direction * r[:, None]
    quats = rng.normal(size=(count, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    scales = rng.uniform(*sigma_range, size=(count, 3))
    opac = rng.uniform(*opacity_range, size=count)
    return means, quats, scales, opac


def make_two_cluster(
    seed: int = 0,
    n_gaussians: int = 2000,
    n_views: int = 12,
    width: int = 128,
    height: int = 128,
    n_mask_views: int = 6,
    tau: float = DEFAULT_TAU,
) -> SynthFixture:
    """Foreground ball above, background ball below, cameras on a ring."""
    rng = np.random.default_rng(seed)
    n_fg = n_gaussians // 2
    n_bg = n_gaussians - n_fg
    ball = 1.0
    sep = 3.6
    sigma = (0.05, 0.10)
    opacity = (0.15, 0.35)
    bg = _gaussian_ball(rng, n_bg, np.array([0.0, sep / 2, 0.0]),
                        ball, sigma, opacity)
    fg = _gaussian_ball(rng, n_fg, np.array([0.0, -sep / 2, 0.0]),
                        ball, sigma, opacity)
    colors = rng.uniform(-1.0, 1.0, size=(n_gaussians, 3))
    scene = GaussianScene(
        means=np.concatenate([bg[0], fg[0]]),
        rotations=np.concatenate([bg[1], fg[1]]),
        scales=np.concatenate([bg[2], fg[2]]),
        opacities=np.concatenate([bg[3], fg[3]]),
        colors_dc=colors,
        source_path=f"synth:two-cluster:{seed}",
    )
    membership = np.concatenate([
        np.zeros(n_bg, dtype=np.uint16), np.ones(n_fg, dtype=np.uint16)])

    focal = float(width)
    views = [
        ring_view(i, azimuth=2.0 * math.pi * i / n_views, radius=8.0,
                  width=width, height=height, focal=focal,
                  elevation=rng.uniform(-0.4, 0.4))
        for i in range(n_views)
    ]
    fixture = SynthFixture(
        scene=scene,
        views=views,
        membership=membership,
        num_objects=2,
        masks={},
        mask_view_ids=[v.view_id for v in views[::2]][:n_mask_views],
    )
    gt = fixture.gt_assignment()
    for view in views:
        rendered = render_scene_mask(scene, gt, view, tau=tau)
        fixture.masks[view.view_id] = LabelMask(
            view_id=view.view_id, labels=rendered.labels)
    return fixture


def make_random(
    seed: int,
    n_gaussians: int = 12,
    n_views: int = 3,
    width: int = 16,
    height: int = 16,
    num_objects: int = 2,
) -> SynthFixture:
    """Small random scene with noise label masks (solver stress preset)."""
    rng = np.random.default_rng(seed)
    means = rng.uniform(-1.2, 1.2, size=(n_gaussians, 3))
    quats = rng.normal(size=(n_gaussians, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    scales = rng.uniform(0.08, 0.4, size=(n_gaussians, 3))
    opac = rng.uniform(0.1, 0.95, size=n_gaussians)
    scene = GaussianScene(
        means=means, rotations=quats, scales=scales, opacities=opac,
        colors_dc=rng.uniform(-1.0, 1.0, size=(n_gaussians, 3)),
        source_path=f"synth:random:{seed}",
    )
    focal = float(width)
    views = [
        ring_view(i, azimuth=2.0 * math.pi * i / max(n_views, 1), radius=5.0,
                  width=width, height=height, focal=focal,
                  elevation=rng.uniform(-1.0, 1.0))
        for i in range(n_views)
    ]
    masks = {
        v.view_id: LabelMask(
            view_id=v.view_id,
            labels=rng.integers(0, num_objects, size=(height, width),
                                dtype=np.uint16))
        for v in views
    }
    membership = rng.integers(0, num_objects, size=n_gaussians,
                              dtype=np.uint16)
    return SynthFixture(
        scene=scene,
        views=views,
        membership=membership,
        num_objects=num_objects,
        masks=masks,
        mask_view_ids=[v.view_id for v in views],
    )


def write_fixture(fixture: SynthFixture, out_dir: str | Path) -> None:
    """Lay the fixture out as CLI-consumable files.

    scene.ply + cameras.json + masks/{view_id}.png (training views only)
    + gt_masks/{view_id}.png (every view, for evaluation).
    """
    out = Path(out_dir)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    (out / "gt_masks").mkdir(parents=True, exist_ok=True)
    export_ply(fixture.scene, out / "scene.ply")
    save_cameras(out / "cameras.json", fixture.views)
    for view_id, mask in fixture.masks.items():
        save_mask_png(out / "gt_masks" / f"{view_id}.png", mask.labels)
        if view_id in fixture.mask_view_ids:
            save_mask_png(out / "masks" / f"{view_id}.png", mask.labels)
