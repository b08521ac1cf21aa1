"""Apply an assignment to a scene: extract or delete object subsets.

Removal deletes member Gaussians outright; remaining indices are
re-packed but the returned index map preserves the original identifiers.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .scene import GaussianScene
from .solver import Assignment


def _union_members(assignment: Assignment, object_ids: Iterable[int]) -> np.ndarray:
    ids = sorted(set(int(i) for i in object_ids))
    union = np.zeros(assignment.num_gaussians, dtype=bool)
    for obj in ids:
        if not 0 <= obj < assignment.num_objects:
            raise ValueError(
                f"unknown object id {obj} (assignment has "
                f"{assignment.num_objects} objects)")
        union |= assignment.members(obj)
    return union


def extract_subset(
    scene: GaussianScene,
    assignment: Assignment,
    object_ids: Iterable[int],
) -> tuple[GaussianScene, np.ndarray]:
    """Scene holding exactly the union of the objects' members.

    Returns (scene, indices) where indices maps new rows back to original
    Gaussian identifiers, in ascending order.
    """
    keep = np.flatnonzero(_union_members(assignment, object_ids))
    return scene.subset(keep), keep


def remove_objects(
    scene: GaussianScene,
    assignment: Assignment,
    object_ids: Iterable[int],
) -> tuple[GaussianScene, np.ndarray]:
    """Complement of extract_subset: drop the objects, keep the rest."""
    keep = np.flatnonzero(~_union_members(assignment, object_ids))
    return scene.subset(keep), keep
