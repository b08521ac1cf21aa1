"""Mask agreement metrics: per-view IoU and pixel accuracy."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .masks import load_mask_png


@dataclass
class ViewScore:
    view_id: str
    iou: float
    accuracy: float


@dataclass
class EvalReport:
    per_view: list[ViewScore]

    @property
    def miou(self) -> float:
        """Mean IoU over views, in percent."""
        return 100.0 * float(np.mean([s.iou for s in self.per_view]))

    @property
    def macc(self) -> float:
        return 100.0 * float(np.mean([s.accuracy for s in self.per_view]))


def mask_scores(pred: np.ndarray, gt: np.ndarray) -> tuple[float, float]:
    """(IoU, accuracy) for one view.

    IoU averages over the object IDs (label > 0) present in either mask;
    two all-background masks score IoU 1.
    """
    if pred.shape != gt.shape:
        raise ValueError(f"mask shapes differ: {pred.shape} vs {gt.shape}")
    ids = sorted(set(np.unique(pred[pred > 0])) | set(np.unique(gt[gt > 0])))
    if not ids:
        iou = 1.0
    else:
        parts = []
        for obj in ids:
            inter = np.count_nonzero((pred == obj) & (gt == obj))
            union = np.count_nonzero((pred == obj) | (gt == obj))
            parts.append(inter / union)
        iou = float(np.mean(parts))
    accuracy = float(np.mean(pred == gt))
    return iou, accuracy


def evaluate_mask_dirs(pred_dir: str | Path, gt_dir: str | Path) -> EvalReport:
    """Score every PNG in pred_dir against the same-named GT file."""
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    files = sorted(pred_dir.glob("*.png"))
    if not files:
        raise ValueError(f"no .png masks found in {pred_dir}")
    scores = []
    for f in files:
        gt_path = gt_dir / f.name
        if not gt_path.exists():
            raise ValueError(f"no ground-truth mask for {f.name} in {gt_dir}")
        iou, acc = mask_scores(load_mask_png(f), load_mask_png(gt_path))
        scores.append(ViewScore(view_id=f.stem, iou=iou, accuracy=acc))
    return EvalReport(per_view=scores)
