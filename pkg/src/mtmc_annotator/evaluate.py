"""ID-based evaluation of generated trajectories against ground truth.

A prediction matches a ground-truth trajectory to the degree that it covers
the ground truth's frames with per-frame IoU above a threshold. Predictions
are greedily assigned to ground truths by descending degree; assignments
above the high threshold count as identity true positives.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .tracker import Trajectory

DEFAULT_HIGH = 0.8
DEFAULT_LOW = 0.2
DEFAULT_IOU_MIN = 0.5


@dataclass(frozen=True)
class MatchDegree:
    """Coverage of one ground-truth trajectory by one prediction, in [0, 1]."""

    predicted_id: int
    gt_id: int
    degree: float


@dataclass(frozen=True)
class IdCounts:
    """Identity-level true/false positive and false negative counts."""

    idtp: int
    idfp: int
    idfn: int
    ambiguous: int = 0  # predictions whose best degree fell in (low, high]


@dataclass(frozen=True)
class CameraResult:
    scene: str
    camera_id: str
    n_pred: int
    n_gt: int
    counts: IdCounts
    precision: float
    recall: float


@dataclass(frozen=True)
class EvalReport:
    cameras: tuple[CameraResult, ...]
    totals: IdCounts
    precision: float
    recall: float


def matching_degree(
    pred: Trajectory, gt: Trajectory, iou_min: float = DEFAULT_IOU_MIN
) -> float:
    """Fraction of gt frames where the prediction exists with IoU >= iou_min."""
    if pred.camera_id != gt.camera_id:
        raise ValueError(
            f"cannot compare trajectories across cameras "
            f"({pred.camera_id!r} vs {gt.camera_id!r})"
        )
    if not gt.boxes:
        return 0.0
    matched = 0
    for frame, gt_box in gt.boxes.items():
        pred_box = pred.boxes.get(frame)
        if pred_box is not None and pred_box.iou(gt_box) >= iou_min:
            matched += 1
    return matched / len(gt.boxes)


def match_degrees(
    preds: Sequence[Trajectory],
    gts: Sequence[Trajectory],
    iou_min: float = DEFAULT_IOU_MIN,
) -> list[MatchDegree]:
    """All nonzero prediction/ground-truth degrees."""
    out = []
    for pred in preds:
        for gt in gts:
            degree = matching_degree(pred, gt, iou_min)
            if degree > 0.0:
                out.append(MatchDegree(pred.trajectory_id, gt.trajectory_id, degree))
    return out


def classify(
    preds: Sequence[Trajectory],
    gts: Sequence[Trajectory],
    high: float = DEFAULT_HIGH,
    low: float = DEFAULT_LOW,
    iou_min: float = DEFAULT_IOU_MIN,
) -> IdCounts:
    """Greedy identity classification.

    Pairs are taken in descending degree order (ties: smaller prediction id,
    then smaller gt id); each prediction and each ground truth is used at
    most once. Predictions assigned with degree > high are IDTP, every other
    prediction is IDFP, and IDFN is the number of ground truths left without
    an IDTP match.
    """
    cameras = {t.camera_id for t in preds} | {t.camera_id for t in gts}
    if len(cameras) > 1:
        raise ValueError(f"classify expects one camera, got {sorted(cameras)}")

    pairs = match_degrees(preds, gts, iou_min)
    pairs.sort(key=lambda m: (-m.degree, m.predicted_id, m.gt_id))

    assigned_pred: dict[int, float] = {}
    used_gt: set[int] = set()
    for pair in pairs:
        if pair.predicted_id in assigned_pred or pair.gt_id in used_gt:
            continue
        assigned_pred[pair.predicted_id] = pair.degree
        used_gt.add(pair.gt_id)

    idtp = sum(1 for degree in assigned_pred.values() if degree > high)
    ambiguous = sum(1 for degree in assigned_pred.values() if low < degree <= high)
    idfp = len(preds) - idtp
    idfn = len(gts) - idtp
    return IdCounts(idtp=idtp, idfp=idfp, idfn=idfn, ambiguous=ambiguous)


def precision_recall(counts: IdCounts) -> tuple[float, float]:
    """Identity precision and recall; zero when a denominator is zero."""
    denom_p = counts.idtp + counts.idfp
    denom_r = counts.idtp + counts.idfn
    precision = counts.idtp / denom_p if denom_p > 0 else 0.0
    recall = counts.idtp / denom_r if denom_r > 0 else 0.0
    return precision, recall


def evaluate_cameras(
    preds_by_camera: Mapping[str, Sequence[Trajectory]],
    gts_by_camera: Mapping[str, Sequence[Trajectory]],
    scene: str = "S00",
    high: float = DEFAULT_HIGH,
    low: float = DEFAULT_LOW,
    iou_min: float = DEFAULT_IOU_MIN,
) -> EvalReport:
    """Per-camera classification plus pooled totals."""
    results = []
    tp = fp = fn = amb = 0
    for camera_id in sorted(set(preds_by_camera) | set(gts_by_camera)):
        preds = list(preds_by_camera.get(camera_id, []))
        gts = list(gts_by_camera.get(camera_id, []))
        counts = classify(preds, gts, high=high, low=low, iou_min=iou_min)
        precision, recall = precision_recall(counts)
        results.append(
            CameraResult(
                scene=scene,
                camera_id=camera_id,
                n_pred=len(preds),
                n_gt=len(gts),
                counts=counts,
                precision=precision,
                recall=recall,
            )
        )
        tp += counts.idtp
        fp += counts.idfp
        fn += counts.idfn
        amb += counts.ambiguous

    totals = IdCounts(idtp=tp, idfp=fp, idfn=fn, ambiguous=amb)
    precision, recall = precision_recall(totals)
    return EvalReport(
        cameras=tuple(results), totals=totals, precision=precision, recall=recall
    )


def write_report_csv(path: Path | str, report: EvalReport) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["scene", "camera", "algorithm", "ground_truth", "precision_pct", "recall_pct"]
        )
        for cam in report.cameras:
            writer.writerow(
                [
                    cam.scene,
                    cam.camera_id,
                    cam.n_pred,
                    cam.n_gt,
                    f"{100.0 * cam.precision:.2f}",
                    f"{100.0 * cam.recall:.2f}",
                ]
            )


def write_report_json(path: Path | str, report: EvalReport) -> None:
    doc = {
        "cameras": [
            {
                "scene": cam.scene,
                "camera_id": cam.camera_id,
                "n_pred": cam.n_pred,
                "n_gt": cam.n_gt,
                "idtp": cam.counts.idtp,
                "idfp": cam.counts.idfp,
                "idfn": cam.counts.idfn,
                "precision": cam.precision,
                "recall": cam.recall,
            }
            for cam in report.cameras
        ],
        "totals": {
            "idtp": report.totals.idtp,
            "idfp": report.totals.idfp,
            "idfn": report.totals.idfn,
            "precision": report.precision,
            "recall": report.recall,
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


__all__ = [
    "CameraResult",
    "EvalReport",
    "IdCounts",
    "MatchDegree",
    "classify",
    "evaluate_cameras",
    "match_degrees",
    "matching_degree",
    "precision_recall",
    "write_report_csv",
    "write_report_json",
]
