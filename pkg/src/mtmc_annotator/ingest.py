"""Detection file ingest: parsing, key-frame sampling and confidence filtering.

Detections arrive as one CSV per camera (header ``frame,id,x,y,w,h,conf``)
plus a binary sidecar holding one appearance feature vector per CSV row.
Boxes are stored on disk as x,y,w,h and converted to corner form in memory.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

DETECTIONS_HEADER = "frame,id,x,y,w,h,conf"
FEATURE_MAGIC = b"MTFT"
FEATURE_SUFFIX = ".ftr"


class DetectionFormatError(ValueError):
    """Detection or feature file does not conform to the expected layout."""


class FeatureDimensionError(ValueError):
    """A feature row does not match the declared dimensionality."""


class FrameRangeError(ValueError):
    """A detection references a frame outside the camera's clip."""


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in image coordinates, corner form (x1, y1, x2, y2)."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(np.isfinite(c) for c in coords):
            raise ValueError(f"non-finite box coordinates: {coords}")
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValueError(f"inverted box: {coords}")

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    def area(self) -> float:
        return self.width * self.height

    def center(self) -> tuple[float, float]:
        return ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)

    def iou(self, other: "BoundingBox") -> float:
        ix1 = max(self.x1, other.x1)
        iy1 = max(self.y1, other.y1)
        ix2 = min(self.x2, other.x2)
        iy2 = min(self.y2, other.y2)
        inter = max(0.0, ix2 - ix1) * max(0.0, iy2 - iy1)
        union = self.area() + other.area() - inter
        return inter / union if union > 0 else 0.0

    def clamped(self, width: float, height: float) -> "BoundingBox":
        """Clamp all coordinates into [0, width] x [0, height]."""

        def clip(v: float, hi: float) -> float:
            return min(max(v, 0.0), float(hi))

        return BoundingBox(
            clip(self.x1, width), clip(self.y1, height),
            clip(self.x2, width), clip(self.y2, height),
        )

    def as_xywh(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.width, self.height)


@dataclass(eq=False)
class Detection:
    """One detected vehicle: a box, a confidence and an appearance feature."""

    camera_id: str
    frame: int
    box: BoundingBox
    confidence: float
    feature: np.ndarray
    detection_id: int

    def __post_init__(self) -> None:
        if self.frame < 0:
            raise ValueError(f"negative frame index {self.frame}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        self.feature = np.asarray(self.feature, dtype=np.float32)


@dataclass(frozen=True)
class SamplingConfig:
    """Key-frame stride and detector confidence cut-off."""

    interval: int = 1
    fps: float = 10.0
    confidence_threshold: float = 0.1

    def __post_init__(self) -> None:
        if self.interval < 1:
            raise ValueError(f"interval must be >= 1, got {self.interval}")
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold outside [0, 1]")


@dataclass(frozen=True)
class CameraVideoMeta:
    """Source clip properties for one camera."""

    camera_id: str
    clip_uri: str
    frame_count: int
    width: int
    height: int
    fps: float

    def __post_init__(self) -> None:
        if self.frame_count < 1:
            raise ValueError("frame_count must be >= 1")
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if self.fps <= 0:
            raise ValueError("fps must be positive")


def default_feature_path(detections_path: Path | str) -> Path:
    return Path(detections_path).with_suffix(FEATURE_SUFFIX)


def read_features(path: Path | str) -> np.ndarray:
    """Read a binary feature file into an (n, D) float32 array."""
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != FEATURE_MAGIC:
        raise DetectionFormatError(f"{path}: bad feature file header")
    count, dim = struct.unpack_from("<II", raw, 4)
    expected = 12 + 4 * count * dim
    if len(raw) != expected:
        have = (len(raw) - 12) // (4 * dim) if dim else 0
        raise FeatureDimensionError(
            f"{path}: feature payload truncated at row {have} "
            f"(declared {count} rows of dim {dim})"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=12)
    return data.reshape(count, dim).astype(np.float32)


def write_features(path: Path | str, features: np.ndarray) -> None:
    features = np.asarray(features, dtype=np.float32)
    if features.ndim != 2:
        raise ValueError("features must be a 2-D array")
    count, dim = features.shape
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<II", count, dim))
        fh.write(features.astype("<f4").tobytes())


def parse_detections(
    path: Path | str,
    meta: CameraVideoMeta,
    feature_path: Path | str | None = None,
) -> list[Detection]:
    """Parse one camera's detection CSV plus its feature sidecar.

    Returns detections sorted by (frame, detection_id) with boxes clamped to
    the image bounds. Rows with id -1 (un-identified detector output) get the
    row index as detection_id. Any malformed row aborts the parse: silent
    data loss in an annotation tool is worse than a hard error.
    """
    path = Path(path)
    if feature_path is None:
        feature_path = default_feature_path(path)

    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != DETECTIONS_HEADER:
        raise DetectionFormatError(
            f"{path}: expected header '{DETECTIONS_HEADER}', "
            f"got {lines[0].strip() if lines else '<empty file>'!r}"
        )

    features = read_features(feature_path)
    rows = [ln for ln in lines[1:] if ln.strip()]
    if len(rows) != features.shape[0]:
        raise DetectionFormatError(
            f"{path}: {len(rows)} detection rows but "
            f"{features.shape[0]} feature rows in {feature_path}"
        )

    detections: list[Detection] = []
    for k, line in enumerate(rows):
        fields = line.split(",")
        if len(fields) != 7:
            raise DetectionFormatError(f"{path}: row {k}: expected 7 fields, got {len(fields)}")
        try:
            frame = int(fields[0])
            det_id = int(fields[1])
            x, y, w, h, conf = (float(v) for v in fields[2:])
        except ValueError as exc:
            raise DetectionFormatError(f"{path}: row {k}: {exc}") from None
        if w < 0 or h < 0:
            raise DetectionFormatError(f"{path}: row {k}: negative box size {w}x{h}")
        if not 0.0 <= conf <= 1.0:
            raise DetectionFormatError(f"{path}: row {k}: confidence {conf} outside [0, 1]")
        if frame < 0:
            raise DetectionFormatError(f"{path}: row {k}: negative frame {frame}")
        if frame >= meta.frame_count:
            raise FrameRangeError(
                f"{path}: row {k}: frame {frame} >= frame_count {meta.frame_count}"
            )
        box = BoundingBox(x, y, x + w, y + h).clamped(meta.width, meta.height)
        detections.append(
            Detection(
                camera_id=meta.camera_id,
                frame=frame,
                box=box,
                confidence=conf,
                feature=features[k],
                detection_id=det_id if det_id != -1 else k,
            )
        )

    detections.sort(key=lambda d: (d.frame, d.detection_id))
    return detections


def write_detections(
    path: Path | str,
    detections: Sequence[Detection],
    feature_path: Path | str | None = None,
    feature_dim: int | None = None,
) -> None:
    """Write detections as CSV + feature sidecar (inverse of parse_detections).

    Floats are written with repr so a parse/write cycle is bit-exact.
    """
    path = Path(path)
    if feature_path is None:
        feature_path = default_feature_path(path)
    if feature_dim is None:
        feature_dim = len(detections[0].feature) if detections else 0

    lines = [DETECTIONS_HEADER]
    feats = np.zeros((len(detections), feature_dim), dtype=np.float32)
    for k, det in enumerate(detections):
        x, y, w, h = (float(v) for v in det.box.as_xywh())
        conf = float(det.confidence)
        lines.append(
            f"{det.frame},{det.detection_id},{x!r},{y!r},{w!r},{h!r},{conf!r}"
        )
        if len(det.feature) != feature_dim:
            raise FeatureDimensionError(
                f"row {k}: feature dim {len(det.feature)} != {feature_dim}"
            )
        feats[k] = det.feature
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_features(feature_path, feats)


def sample_and_filter(
    detections: Sequence[Detection], cfg: SamplingConfig
) -> list[Detection]:
    """Keep detections on key frames (frame % interval == 0, anchored at 0)
    whose confidence is >= the threshold. Inclusive comparison: a detection
    exactly at the threshold survives. Idempotent; preserves relative order.
    """
    return [
        d
        for d in detections
        if d.frame % cfg.interval == 0 and d.confidence >= cfg.confidence_threshold
    ]


def group_by_frame(detections: Sequence[Detection]) -> list[list[Detection]]:
    """Group detections (sorted by frame) into per-frame lists, ascending."""
    frames: dict[int, list[Detection]] = {}
    for det in detections:
        frames.setdefault(det.frame, []).append(det)
    return [frames[f] for f in sorted(frames)]


def load_camera_meta(path: Path | str) -> CameraVideoMeta:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return CameraVideoMeta(
            camera_id=doc["camera_id"],
            clip_uri=doc["clip_uri"],
            frame_count=int(doc["frame_count"]),
            width=int(doc["width"]),
            height=int(doc["height"]),
            fps=float(doc["fps"]),
        )
    except KeyError as exc:
        raise DetectionFormatError(f"{path}: missing camera meta key {exc}") from None


def save_camera_meta(path: Path | str, meta: CameraVideoMeta) -> None:
    doc = {
        "camera_id": meta.camera_id,
        "clip_uri": meta.clip_uri,
        "frame_count": meta.frame_count,
        "width": meta.width,
        "height": meta.height,
        "fps": meta.fps,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


__all__ = [
    "BoundingBox",
    "CameraVideoMeta",
    "Detection",
    "DetectionFormatError",
    "FeatureDimensionError",
    "FrameRangeError",
    "SamplingConfig",
    "default_feature_path",
    "group_by_frame",
    "load_camera_meta",
    "parse_detections",
    "read_features",
    "sample_and_filter",
    "save_camera_meta",
    "write_detections",
    "write_features",
]
