from __future__ import annotations

import numpy as np
import pytest

from mtmc_annotator.ingest import BoundingBox, CameraVideoMeta, Detection
from mtmc_annotator.scenario import Scenario, ScenarioConfig, generate
from mtmc_annotator.tracker import Trajectory


def make_box(x1=0.0, y1=0.0, x2=10.0, y2=10.0) -> BoundingBox:
    return BoundingBox(x1, y1, x2, y2)


def make_detection(
    camera_id="c000",
    frame=0,
    box=None,
    confidence=0.9,
    feature=None,
    detection_id=0,
    dim=4,
) -> Detection:
    if box is None:
        box = make_box()
    if feature is None:
        feature = np.zeros(dim, dtype=np.float32)
        feature[detection_id % dim] = 1.0
    return Detection(
        camera_id=camera_id,
        frame=frame,
        box=box,
        confidence=confidence,
        feature=np.asarray(feature, dtype=np.float32),
        detection_id=detection_id,
    )


def make_trajectory(
    trajectory_id=1,
    camera_id="c000",
    boxes=None,
    fps=10.0,
    feature=None,
) -> Trajectory:
    if boxes is None:
        boxes = {f: make_box(10.0 * f, 0.0, 10.0 * f + 20.0, 20.0) for f in range(5)}
    if feature is None:
        feature = np.array([1.0, 0.0])
    frames = sorted(boxes)
    return Trajectory(
        trajectory_id=trajectory_id,
        camera_id=camera_id,
        boxes=dict(boxes),
        st=frames[0] / fps,
        et=frames[-1] / fps,
        feature=np.asarray(feature, dtype=np.float64),
        frame_features=[np.asarray(feature, dtype=np.float64)],
        n_key_frames=len(frames),
    )


def make_meta(camera_id="c000", frame_count=600, width=1280, height=960, fps=10.0):
    return CameraVideoMeta(
        camera_id=camera_id,
        clip_uri=f"clips/{camera_id}.mp4",
        frame_count=frame_count,
        width=width,
        height=height,
        fps=fps,
    )


CLEAN_CONFIG = ScenarioConfig(seed=7, n_vehicles=10, n_cameras=3, frames_per_camera=300)


@pytest.fixture(scope="session")
def clean_scenario() -> Scenario:
    """Noise-free 3-camera scenario shared by read-only tests."""
    return generate(CLEAN_CONFIG)
