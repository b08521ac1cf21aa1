"""Shared test fixtures and small scene builders."""

from __future__ import annotations


import numpy as np
import pytest

from splatlift import CameraView, Gaussian, GaussianScene


def frontal_view(view_id: int = 0, width: int = 16, height: int = 16,
                 focal: float = 24.0, near_clip: float = 0.01) -> CameraView:
    """Identity-pose camera at the origin looking down +z."""
    return CameraView(
        view_id=view_id,
        width=width,
        height=height,
        fx=focal,
        fy=focal,
        cx=width / 2.0 + 0.5,
        cy=height / 2.0 + 0.5,
        world_to_camera=np.eye(4),
        near_clip=near_clip,
    )


def isotropic_gaussian(center, sigma: float = 0.1, opacity: float = 0.8,
                       color=None) -> Gaussian:
    return Gaussian(
        center=np.asarray(center, dtype=np.float64),
        rotation=np.array([1.0, 0.0, 0.0, 0.0]),
        scale=np.full(3, sigma),
        opacity=opacity,
        color_dc=color,
    )


def random_scene(rng: np.random.Generator, n: int,
                 box: float = 1.2, depth_span=(2.5, 6.0)) -> GaussianScene:
    """Random anisotropic Gaussians in front of the frontal camera."""
    means = np.stack([
        rng.uniform(-box, box, n),
        rng.uniform(-box, box, n),
        rng.uniform(*depth_span, n),
    ], axis=1)
    quats = rng.normal(size=(n, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    scales = rng.uniform(0.05, 0.35, size=(n, 3))
    opac = rng.uniform(0.1, 0.95, size=n)
    return GaussianScene(means=means, rotations=quats, scales=scales,
                         opacities=opac)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
