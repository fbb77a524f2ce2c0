"""Pixel-level IoU and target-level detection/false-alarm evaluation of
pseudo-masks against manual ground truth."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .image import BinaryMask, connected_components, load_mask


@dataclass
class MatchPolicy:
    """A predicted component detects a ground-truth target when their
    centroids lie within centroid_dist (Euclidean, pixels)."""

    centroid_dist: float = 3.0
    count_all_false_pixels: bool = False  # alternative false-alarm accounting

    def __post_init__(self):
        if not self.centroid_dist > 0:
            raise ValueError("centroid_dist must be > 0")


@dataclass
class PerImage:
    image_id: str
    iou: float
    detected: int
    gt_targets: int
    false_pixels: int


@dataclass
class MetricReport:
    mean_iou: float
    pd: float
    fa: float                      # false pixels per image pixel (unscaled)
    per_image: list[PerImage] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_json(self, fa_scale: float = 1e6) -> dict:
        return {
            "mean_iou": self.mean_iou,
            "pd": self.pd,
            "fa": self.fa,
            "fa_scaled": self.fa * fa_scale,
            "fa_scale": fa_scale,
            "per_image": [
                {"image_id": p.image_id, "iou": p.iou, "detected": p.detected,
                 "gt_targets": p.gt_targets, "false_pixels": p.false_pixels}
                for p in self.per_image
            ],
            "warnings": list(self.warnings),
        }

    def to_text(self, fa_scale: float = 1e6) -> str:
        lines = [
            f"{'image_id':<24} {'IoU':>8} {'det/gt':>8} {'false_px':>9}",
        ]
        for p in self.per_image:
            lines.append(f"{p.image_id:<24} {p.iou:>8.4f} "
                         f"{f'{p.detected}/{p.gt_targets}':>8} {p.false_pixels:>9}")
        lines.append("-" * 52)
        lines.append(f"mean IoU = {self.mean_iou:.4f}   Pd = {self.pd:.4f}   "
                     f"Fa = {self.fa * fa_scale:.3f} (x{1 / fa_scale:.0e})")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines)


def iou(pred: BinaryMask, gt: BinaryMask) -> float:
    """Intersection over union; 1.0 when both masks are empty."""
    if pred.data.shape != gt.data.shape:
        raise ValueError("mask dimensions must match")
    union = int((pred.data | gt.data).sum())
    if union == 0:
        return 1.0
    return int((pred.data & gt.data).sum()) / union


def _match_image(pred: BinaryMask, gt: BinaryMask, policy: MatchPolicy):
    """Greedy one-to-one centroid matching in increasing distance order.

    Returns (detected gt targets, gt target count, false pixels).
    """
    pred_comps = connected_components(pred, 8).components
    gt_comps = connected_components(gt, 8).components

    candidates = []
    for gi, gcomp in enumerate(gt_comps):
        for pi, pcomp in enumerate(pred_comps):
            d = float(np.hypot(gcomp.centroid[0] - pcomp.centroid[0],
                               gcomp.centroid[1] - pcomp.centroid[1]))
            if d <= policy.centroid_dist:
                candidates.append((d, gi, pi))
    candidates.sort()

    matched_gt: set[int] = set()
    matched_pred: set[int] = set()
    for d, gi, pi in candidates:
        if gi in matched_gt or pi in matched_pred:
            continue
        matched_gt.add(gi)
        matched_pred.add(pi)

    if policy.count_all_false_pixels:
        false_pixels = int((pred.data & ~gt.data).sum())
    else:
        false_pixels = sum(c.area for pi, c in enumerate(pred_comps)
                           if pi not in matched_pred)
    return len(matched_gt), len(gt_comps), false_pixels


def pd_fa(pairs: list[tuple[BinaryMask, BinaryMask]],
          policy: MatchPolicy | None = None) -> tuple[float, float]:
    """Corpus-level probability of detection and false-alarm rate.

    Pd pools detected / total ground-truth targets; Fa pools false pixels over
    total pixels.  An empty ground truth counts as vacuously detected.
    """
    policy = policy if policy is not None else MatchPolicy()
    detected = targets = false_px = total_px = 0
    for pred, gt in pairs:
        if pred.data.shape != gt.data.shape:
            raise ValueError("mask dimensions must match")
        d, t, f = _match_image(pred, gt, policy)
        detected += d
        targets += t
        false_px += f
        total_px += pred.data.size
    pd = detected / targets if targets else 1.0
    fa = false_px / total_px if total_px else 0.0
    return pd, fa


def evaluate_corpus(pred_dir, gt_dir, policy: MatchPolicy | None = None) -> MetricReport:
    """Evaluate matching filenames between two mask directories.

    Mean IoU is the unweighted average of per-image IoUs; Pd and Fa pool
    components and pixels across the corpus.  Unmatched filenames are reported
    as warnings, not errors.
    """
    policy = policy if policy is not None else MatchPolicy()
    pred_dir = Path(pred_dir)
    gt_dir = Path(gt_dir)
    pred_files = {p.stem: p for p in sorted(pred_dir.glob("*.png"))}
    gt_files = {p.stem: p for p in sorted(gt_dir.glob("*.png"))}

    common = sorted(set(pred_files) & set(gt_files))
    if not common:
        raise ValueError(f"no matching mask filenames between {pred_dir} and {gt_dir}")

    warnings = []
    for stem in sorted(set(pred_files) - set(gt_files)):
        warnings.append(f"prediction {stem} has no ground truth")
    for stem in sorted(set(gt_files) - set(pred_files)):
        warnings.append(f"ground truth {stem} has no prediction")

    per_image = []
    detected = targets = false_px = total_px = 0
    iou_sum = 0.0
    for stem in common:
        pred = load_mask(pred_files[stem])
        gt = load_mask(gt_files[stem])
        if pred.data.shape != gt.data.shape:
            warnings.append(f"{stem}: dimension mismatch, skipped")
            continue
        value = iou(pred, gt)
        d, t, f = _match_image(pred, gt, policy)
        per_image.append(PerImage(image_id=stem, iou=value, detected=d,
                                  gt_targets=t, false_pixels=f))
        iou_sum += value
        detected += d
        targets += t
        false_px += f
        total_px += pred.data.size

    if not per_image:
        raise ValueError("no evaluable image pairs (all mismatched)")

    return MetricReport(
        mean_iou=iou_sum / len(per_image),
        pd=detected / targets if targets else 1.0,
        fa=false_px / total_px if total_px else 0.0,
        per_image=per_image,
        warnings=warnings,
    )


def write_report(report: MetricReport, path, fa_scale: float = 1e6) -> None:
    Path(path).write_text(json.dumps(report.to_json(fa_scale), indent=2) + "\n",
                          encoding="utf-8")
