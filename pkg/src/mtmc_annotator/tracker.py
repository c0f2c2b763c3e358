"""Single-camera trajectory generation from sampled detections.

Deterministic tracking-by-detection: per key-frame-pair minimum-cost
bipartite assignment over a blended IoU/appearance cost, linear gap
interpolation down to every frame, mean appearance aggregation and
static / short-trajectory filtering. The associator is intentionally
model-free so results are reproducible; the module boundary admits
swapping in a different associator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .ingest import (
    BoundingBox,
    CameraVideoMeta,
    Detection,
    FeatureDimensionError,
    SamplingConfig,
    sample_and_filter,
)

FORBIDDEN_COST = 1e9


class InterpolationGapError(ValueError):
    """Key-frame boxes are not contiguous at the declared stride."""


@dataclass(frozen=True)
class AssociationConfig:
    """Tuning knobs for association and trajectory filtering.

    lam blends motion vs appearance cost: c = lam*(1-IoU) + (1-lam)*cos_dist.
    Pairs with IoU below gate_iou or cosine distance above gate_cos are
    never matched. A track survives max_age unmatched key frames before it
    is closed. Defaults are pragmatic starting points, not tuned values.
    """

    lam: float = 0.5
    gate_iou: float = 0.1
    gate_cos: float = 0.4
    max_age: int = 3
    min_duration_s: float = 1.0
    static_iou_threshold: float = 0.05

    def __post_init__(self) -> None:
        for name in ("lam", "gate_iou", "gate_cos", "static_iou_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.max_age < 1:
            raise ValueError("max_age must be >= 1")
        if self.min_duration_s <= 0:
            raise ValueError("min_duration_s must be positive")


@dataclass(eq=False)
class Trajectory:
    """Ordered per-frame boxes of one vehicle under one camera.

    boxes is keyed by frame index over a contiguous range: stride f for a
    key-frame trajectory, stride 1 once interpolated. feature is the
    arithmetic mean of frame_features; orientation is a unit vector of the
    image-plane displacement (zero for non-moving tracks).
    """

    trajectory_id: int
    camera_id: str
    boxes: dict[int, BoundingBox]
    st: float
    et: float
    feature: np.ndarray
    frame_features: list[np.ndarray] = field(default_factory=list)
    orientation: np.ndarray = field(default_factory=lambda: np.zeros(2))
    n_key_frames: int = 0

    def __post_init__(self) -> None:
        if not self.boxes:
            raise ValueError("trajectory must contain at least one box")
        if self.st > self.et:
            raise ValueError(f"st {self.st} > et {self.et}")

    @property
    def uid(self) -> str:
        """Identifier unique across cameras."""
        return f"{self.camera_id}:{self.trajectory_id}"

    def frame_range(self) -> tuple[int, int]:
        return min(self.boxes), max(self.boxes)

    def first_box(self) -> BoundingBox:
        return self.boxes[min(self.boxes)]

    def last_box(self) -> BoundingBox:
        return self.boxes[max(self.boxes)]


def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """1 - cosine similarity; degenerate zero vectors count as unrelated."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 1.0
    return float(1.0 - np.dot(a, b) / (na * nb))


def min_cost_matching(
    cost: np.ndarray, allowed: np.ndarray
) -> list[tuple[int, int]]:
    """Maximum-cardinality, minimum-cost matching over allowed pairs.

    Forbidden pairs are priced out at FORBIDDEN_COST and dropped from the
    solution, which yields the largest allowed matching first and the
    cheapest among those second.
    """
    if cost.size == 0:
        return []
    priced = np.where(allowed, cost, FORBIDDEN_COST)
    rows, cols = linear_sum_assignment(priced)
    return [(int(r), int(c)) for r, c in zip(rows, cols) if allowed[r, c]]


class _Track:
    """Mutable association state for one in-progress trajectory."""

    __slots__ = ("track_id", "boxes", "features", "last_frame", "last_box",
                 "last_feature", "misses")

    def __init__(self, track_id: int, frame: int, det: Detection) -> None:
        self.track_id = track_id
        self.boxes: dict[int, BoundingBox] = {frame: det.box}
        self.features: list[np.ndarray] = [det.feature]
        self.last_frame = frame
        self.last_box = det.box
        self.last_feature = det.feature
        self.misses = 0

    def extend(self, frame: int, det: Detection, interval: int) -> None:
        # Bridge missed key frames linearly so the box range stays contiguous.
        gap = frame - self.last_frame
        if gap > interval:
            a, b = self.last_box, det.box
            for j in range(self.last_frame + interval, frame, interval):
                t = (j - self.last_frame) / gap
                self.boxes[j] = BoundingBox(
                    a.x1 + t * (b.x1 - a.x1),
                    a.y1 + t * (b.y1 - a.y1),
                    a.x2 + t * (b.x2 - a.x2),
                    a.y2 + t * (b.y2 - a.y2),
                )
        self.boxes[frame] = det.box
        self.features.append(det.feature)
        self.last_frame = frame
        self.last_box = det.box
        self.last_feature = det.feature
        self.misses = 0


def associate(
    frames: Sequence[Sequence[Detection]],
    cfg: AssociationConfig,
    fps: float = 1.0,
    interval: int = 1,
) -> list[Trajectory]:
    """Link per-key-frame detection sets into key-frame trajectories.

    frames must be ordered by frame index and may contain empty sets (key
    frames with no detections age all open tracks). All detections must
    come from one camera.
    """
    camera_ids = {d.camera_id for group in frames for d in group}
    if len(camera_ids) > 1:
        raise ValueError(f"detections span multiple cameras: {sorted(camera_ids)}")
    camera_id = camera_ids.pop() if camera_ids else "unknown"

    active: list[_Track] = []
    finished: list[_Track] = []
    next_id = 1

    for group in frames:
        dets = list(group)
        matches: list[tuple[int, int]] = []
        if active and dets:
            cost = np.zeros((len(active), len(dets)))
            allowed = np.zeros((len(active), len(dets)), dtype=bool)
            for i, trk in enumerate(active):
                for j, det in enumerate(dets):
                    iou = trk.last_box.iou(det.box)
                    cos = cosine_distance(trk.last_feature, det.feature)
                    allowed[i, j] = iou >= cfg.gate_iou and cos <= cfg.gate_cos
                    cost[i, j] = cfg.lam * (1.0 - iou) + (1.0 - cfg.lam) * cos
            matches = min_cost_matching(cost, allowed)

        matched_tracks = {i for i, _ in matches}
        matched_dets = {j for _, j in matches}
        for i, j in matches:
            active[i].extend(dets[j].frame, dets[j], interval)

        survivors: list[_Track] = []
        for i, trk in enumerate(active):
            if i in matched_tracks:
                survivors.append(trk)
                continue
            trk.misses += 1
            if trk.misses > cfg.max_age:
                finished.append(trk)
            else:
                survivors.append(trk)
        active = survivors

        for j, det in enumerate(dets):
            if j not in matched_dets:
                active.append(_Track(next_id, det.frame, det))
                next_id += 1

    finished.extend(active)
    finished.sort(key=lambda t: t.track_id)

    trajectories = []
    for trk in finished:
        first, last = min(trk.boxes), max(trk.boxes)
        trajectories.append(
            Trajectory(
                trajectory_id=trk.track_id,
                camera_id=camera_id,
                boxes=dict(sorted(trk.boxes.items())),
                st=first / fps,
                et=last / fps,
                feature=aggregate_feature(trk.features),
                frame_features=trk.features,
                n_key_frames=len(trk.features),
            )
        )
    return trajectories


def interpolate(traj: Trajectory, interval: int) -> Trajectory:
    """Fill every frame between consecutive key frames by linear interpolation.

    Key-frame boxes are reproduced exactly; nothing is extrapolated beyond
    the first or last key frame.
    """
    if interval < 1:
        raise ValueError(f"interval must be >= 1, got {interval}")
    keys = sorted(traj.boxes)
    first, last = keys[0], keys[-1]
    expected = list(range(first, last + 1, interval))
    if keys != expected:
        raise InterpolationGapError(
            f"trajectory {traj.uid}: key frames {keys} are not contiguous "
            f"at stride {interval}"
        )

    dense: dict[int, BoundingBox] = {}
    for i in keys[:-1]:
        a = traj.boxes[i]
        b = traj.boxes[i + interval]
        dense[i] = a
        for j in range(i + 1, i + interval):
            t = (j - i) / interval
            dense[j] = BoundingBox(
                a.x1 + t * (b.x1 - a.x1),
                a.y1 + t * (b.y1 - a.y1),
                a.x2 + t * (b.x2 - a.x2),
                a.y2 + t * (b.y2 - a.y2),
            )
    dense[last] = traj.boxes[last]

    return Trajectory(
        trajectory_id=traj.trajectory_id,
        camera_id=traj.camera_id,
        boxes=dense,
        st=traj.st,
        et=traj.et,
        feature=traj.feature,
        frame_features=traj.frame_features,
        orientation=traj.orientation,
        n_key_frames=traj.n_key_frames,
    )


def aggregate_feature(
    frame_features: Sequence[np.ndarray], normalize: bool = False
) -> np.ndarray:
    """Arithmetic mean of the per-key-frame feature vectors (float64).

    With normalize=True every frame feature is L2-normalized before
    averaging; raw averaging is the default.
    """
    if len(frame_features) == 0:
        raise ValueError("cannot aggregate an empty feature sequence")
    dims = {len(f) for f in frame_features}
    if len(dims) != 1:
        raise FeatureDimensionError(f"mixed feature dimensions: {sorted(dims)}")
    stack = np.asarray(frame_features, dtype=np.float64)
    if normalize:
        norms = np.linalg.norm(stack, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        stack = stack / norms
    return stack.mean(axis=0)


def compute_orientation(traj: Trajectory) -> np.ndarray:
    """Unit vector from the first box center to the last; zero if static."""
    cx0, cy0 = traj.first_box().center()
    cx1, cy1 = traj.last_box().center()
    disp = np.array([cx1 - cx0, cy1 - cy0])
    norm = np.linalg.norm(disp)
    if norm < 1e-6:
        return np.zeros(2)
    return disp / norm


def filter_trajectories(
    trajectories: Sequence[Trajectory], cfg: AssociationConfig, fps: float
) -> list[Trajectory]:
    """Drop short-lived and static trajectories.

    A trajectory is removed when it lasts under min_duration_s or when its
    first and last boxes still overlap more than static_iou_threshold,
    i.e. the target barely moved (false positives are usually both).
    """
    kept = []
    for traj in trajectories:
        if traj.et - traj.st < cfg.min_duration_s:
            continue
        if traj.first_box().iou(traj.last_box()) > cfg.static_iou_threshold:
            continue
        kept.append(traj)
    return kept


def frame_groups(
    detections: Sequence[Detection], frame_count: int, interval: int
) -> list[list[Detection]]:
    """Arrange sampled detections into one (possibly empty) set per key frame."""
    groups: dict[int, list[Detection]] = {
        f: [] for f in range(0, frame_count, interval)
    }
    for det in detections:
        if det.frame not in groups:
            raise ValueError(f"detection at frame {det.frame} is not on the key-frame grid")
        groups[det.frame].append(det)
    return [groups[f] for f in sorted(groups)]


def track_camera(
    detections: Sequence[Detection],
    meta: CameraVideoMeta,
    sampling: SamplingConfig,
    assoc: AssociationConfig,
) -> list[Trajectory]:
    """Full single-camera pipeline: sample, associate, densify, filter."""
    sampled = sample_and_filter(detections, sampling)
    groups = frame_groups(sampled, meta.frame_count, sampling.interval)
    key_frame_trajs = associate(groups, assoc, fps=meta.fps, interval=sampling.interval)
    dense = []
    for traj in key_frame_trajs:
        densified = interpolate(traj, sampling.interval)
        densified.orientation = compute_orientation(densified)
        dense.append(densified)
    return filter_trajectories(dense, assoc, meta.fps)


def write_trajectories(path: Path | str, trajectories: Sequence[Trajectory]) -> None:
    """Persist trajectories as JSON-lines, one trajectory per line."""
    lines = []
    for traj in trajectories:
        doc = {
            "trajectory_id": traj.trajectory_id,
            "camera_id": traj.camera_id,
            "st": traj.st,
            "et": traj.et,
            "boxes": [
                [f, b.x1, b.y1, b.x2, b.y2]
                for f, b in sorted(traj.boxes.items())
            ],
            "feature": [float(v) for v in traj.feature],
            "orientation": [float(v) for v in traj.orientation],
        }
        lines.append(json.dumps(doc, sort_keys=True))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_trajectories(path: Path | str) -> list[Trajectory]:
    """Load trajectories written by write_trajectories.

    Per-frame features are not part of the wire format; loaded trajectories
    carry the aggregate feature only.
    """
    trajectories = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        boxes = {
            int(f): BoundingBox(x1, y1, x2, y2)
            for f, x1, y1, x2, y2 in doc["boxes"]
        }
        trajectories.append(
            Trajectory(
                trajectory_id=int(doc["trajectory_id"]),
                camera_id=doc["camera_id"],
                boxes=boxes,
                st=float(doc["st"]),
                et=float(doc["et"]),
                feature=np.asarray(doc["feature"], dtype=np.float64),
                orientation=np.asarray(doc["orientation"], dtype=np.float64),
            )
        )
    return trajectories


__all__ = [
    "AssociationConfig",
    "InterpolationGapError",
    "Trajectory",
    "aggregate_feature",
    "associate",
    "compute_orientation",
    "cosine_distance",
    "filter_trajectories",
    "frame_groups",
    "interpolate",
    "min_cost_matching",
    "read_trajectories",
    "track_camera",
    "write_trajectories",
]
