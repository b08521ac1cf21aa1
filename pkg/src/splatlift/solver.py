"""Closed-form label assignment from accumulated contributions.

The mask-fitting objective (sum of per-pixel absolute errors between the
blended label channel and the given masks) is linear in the per-Gaussian
labels, so the global optimum is a per-Gaussian argmax over accumulated
contributions.  A background bias ``gamma`` shifts the normalized
background share before the argmax: positive values suppress foreground
noise, negative values clean up the background.

``brute_force_oracle`` certifies optimality on small instances by scoring
every labeling with the exact objective.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .contributions import ContributionMatrix, LabelMask
from .rasterizer import EXACT_BLEND, BlendConfig
from .reference import reference_pixel_weights
from .scene import CameraView, GaussianScene

UNOBSERVED_EPS = 1e-12
BRUTE_FORCE_CAP = 20


@dataclass
class Assignment:
    """Per-Gaussian membership produced by the solver.

    Binary mode stores one 0/1 label per Gaussian; scene mode stores a
    0/1 membership row per object (row 0 is the background complement).
    """

    mode: str
    gamma: float
    labels: Optional[np.ndarray] = None
    membership: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.mode not in ("binary", "scene"):
            raise ValueError(f"unknown assignment mode {self.mode!r}")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.uint8)
        if self.membership is not None:
            self.membership = np.asarray(self.membership, dtype=np.uint8)

    @property
    def num_gaussians(self) -> int:
        if self.mode == "binary":
            return int(self.labels.shape[0])
        return int(self.membership.shape[1])

    @property
    def num_objects(self) -> int:
        return 2 if self.mode == "binary" else int(self.membership.shape[0])

    def members(self, object_id: int) -> np.ndarray:
        """Boolean member mask of one object."""
        if not 0 <= object_id < self.num_objects:
            raise ValueError(f"unknown object id {object_id}")
        if self.mode == "binary":
            fg = self.labels.astype(bool)
            return fg if object_id == 1 else ~fg
        return self.membership[object_id].astype(bool)

    def member_counts(self) -> list[int]:
        if self.mode == "binary":
            fg = int(np.count_nonzero(self.labels))
            return [self.num_gaussians - fg, fg]
        return self.membership.sum(axis=1, dtype=np.int64).tolist()

    def save(self, path: str | Path) -> None:
        header = {
            "mode": self.mode,
            "gamma": self.gamma,
            "E": self.num_objects,
            "N": self.num_gaussians,
        }
        payload = (self.labels if self.mode == "binary"
                   else self.membership).tobytes()
        with open(path, "wb") as fh:
            head = json.dumps(header).encode("ascii")
            fh.write(struct.pack("<I", len(head)))
            fh.write(head)
            fh.write(payload)

    @classmethod
    def load(cls, path: str | Path) -> "Assignment":
        with open(path, "rb") as fh:
            (hlen,) = struct.unpack("<I", fh.read(4))
            header = json.loads(fh.read(hlen).decode("ascii"))
            payload = np.frombuffer(fh.read(), dtype=np.uint8)
        mode, e, n = header["mode"], header["E"], header["N"]
        if mode == "binary":
            if payload.size != n:
                raise ValueError(f"{path}: expected {n} labels, got {payload.size}")
            return cls(mode=mode, gamma=header["gamma"], labels=payload.copy())
        if payload.size != e * n:
            raise ValueError(f"{path}: expected {e}x{n} membership payload")
        return cls(mode=mode, gamma=header["gamma"],
                   membership=payload.reshape(e, n).copy())


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not -1.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [-1, 1], got {gamma}")
    return gamma


def _one_vs_rest_wins(values: np.ndarray, gamma: float) -> np.ndarray:
    """Strict one-against-the-rest wins per (row, column), float32 path.

    For each row t the column's (rest, row-t) pair is L1-normalized by the
    shared column sum, gamma is added to the rest/background share, and the
    row wins only strictly.  Unobserved columns never win.  Binary and
    scene assignment both route through this so they agree bit-for-bit.
    """
    total = values.sum(axis=0, dtype=np.float32)
    observed = total > UNOBSERVED_EPS
    inv = np.empty_like(total)
    np.divide(np.float32(1.0), total, out=inv, where=observed)
    inv[~observed] = 0.0
    fg = values * inv
    rest = total - values
    rest *= inv
    rest += np.float32(gamma)
    wins = fg > rest
    wins &= observed
    return wins


def assign_binary(matrix: ContributionMatrix, gamma: float) -> Assignment:
    """Foreground/background argmax with background bias.

    Per Gaussian the (background, foreground) pair is L1-normalized, gamma
    is added to the background share, and the Gaussian goes foreground only
    on a strict win.  Unobserved columns stay background.
    """
    gamma = _check_gamma(gamma)
    if matrix.num_objects != 2:
        raise ValueError(
            f"binary assignment requires E=2, got E={matrix.num_objects}")
    wins = _one_vs_rest_wins(matrix.values, gamma)
    return Assignment(mode="binary", gamma=gamma,
                      labels=wins[1].astype(np.uint8))


def assign_scene(matrix: ContributionMatrix, gamma: float) -> Assignment:
    """One-against-the-rest argmax for every object, in a single pass.

    For each object t >= 1 the pair (everything-else, object-t) of each
    column is L1-normalized against the shared column sum, gamma is added
    to the background share, and membership requires a strict win.  Row 0
    is the complement of the union of the object rows.
    """
    gamma = _check_gamma(gamma)
    e, n = matrix.values.shape
    if e < 2:
        raise ValueError(f"scene assignment requires E>=2, got E={e}")
    wins = _one_vs_rest_wins(matrix.values, gamma)
    membership = np.zeros((e, n), dtype=np.uint8)
    membership[1:] = wins[1:]
    membership[0] = ~membership[1:].any(axis=0)
    return Assignment(mode="scene", gamma=gamma, membership=membership)


def objective_value(
    scene: GaussianScene,
    views: Sequence[tuple[CameraView, LabelMask]],
    labels: np.ndarray,
    blend: BlendConfig = EXACT_BLEND,
) -> float:
    """Exact mask-fitting objective: sum of |blended labels - mask|.

    Scored with the reference renderer (throughput floors off by default);
    masks must be binary.
    """
    labels = np.asarray(labels, dtype=np.float64).reshape(len(scene))
    total = 0.0
    for view, mask in views:
        if mask.labels.max(initial=0) > 1:
            raise ValueError(
                f"view {view.view_id}: objective requires binary masks")
        weights = reference_pixel_weights(scene, view, blend)
        rendered = weights @ labels
        total += float(np.abs(rendered - mask.labels.astype(np.float64)).sum())
    return total


def brute_force_oracle(
    scene: GaussianScene,
    views: Sequence[tuple[CameraView, LabelMask]],
    blend: BlendConfig = EXACT_BLEND,
) -> tuple[np.ndarray, float]:
    """Global minimum of the objective by exhausting all 2^N labelings.

    The per-pixel blend weights are computed once per view with the
    reference renderer; every labeling is then scored with the identical
    |weights @ P - mask| objective.  Hard-capped at N=20.
    """
    n = len(scene)
    if n > BRUTE_FORCE_CAP:
        raise ValueError(
            f"brute force enumeration refused for N={n} > {BRUTE_FORCE_CAP}")
    per_view = []
    for view, mask in views:
        if mask.labels.max(initial=0) > 1:
            raise ValueError(
                f"view {view.view_id}: objective requires binary masks")
        weights = reference_pixel_weights(scene, view, blend)
        per_view.append((weights.reshape(-1, n),
                         mask.labels.astype(np.float64).ravel()))

    best_score = np.inf
    best_labels = np.zeros(n, dtype=np.uint8)
    count = 1 << n
    chunk = 1 << 14
    codes = np.arange(count, dtype=np.int64)
    bits = np.arange(n, dtype=np.int64)
    for start in range(0, count, chunk):
        block = codes[start:start + chunk]
        # (N, B) matrix of candidate labelings decoded from the block codes.
        cand = ((block[None, :] >> bits[:, None]) & 1).astype(np.float64)
        scores = np.zeros(block.shape[0], dtype=np.float64)
        for weights, masked in per_view:
            scores += np.abs(weights @ cand - masked[:, None]).sum(axis=0)
        pick = int(np.argmin(scores))
        if scores[pick] < best_score:
            best_score = float(scores[pick])
            best_labels = cand[:, pick].astype(np.uint8)
    return best_labels, best_score
