"""Synthetic multi-camera traffic scenarios for desk-scale verification.

Vehicles traverse a camera graph with per-edge entry-to-entry travel times;
overlapping camera pairs make vehicles enter the downstream view before
leaving the upstream one. Every camera sees a linear constant-velocity box
sweep, which keeps ground truth closed-form. All randomness flows from one
seed, so equal configs produce byte-identical scenario files.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from .evaluate import evaluate_cameras
from .ingest import (
    BoundingBox,
    CameraVideoMeta,
    Detection,
    SamplingConfig,
    parse_detections,
    load_camera_meta,
    save_camera_meta,
    write_detections,
)
from .recommend import Camera, CameraGraph, load_camera_graph, save_camera_graph
from .tracker import (
    AssociationConfig,
    Trajectory,
    read_trajectories,
    track_camera,
    write_trajectories,
)

# Entry-to-entry travel draws keep this many seconds away from the
# configured bounds so frame discretization cannot leak past them.
EDGE_MARGIN_S = 0.2
EXIT_MARGIN_S = 0.3
# An overlap shorter than the two margins combined cannot be expressed.
MIN_OVERLAP_S = EDGE_MARGIN_S + EXIT_MARGIN_S
MIN_FEATURE_ANGLE_DEG = 15.0


class ScenarioConfigError(ValueError):
    """The scenario configuration is inconsistent or infeasible."""


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    n_vehicles: int = 10
    n_cameras: int = 3
    frames_per_camera: int = 600
    topology: str = "line"
    overlap_seconds: float = 1.5
    travel_time_min_s: float = 3.0
    travel_time_max_s: float = 8.0
    dwell_min_s: float = 5.0
    dwell_max_s: float = 7.0
    box_jitter_px: float = 0.0
    feature_noise: float = 0.0
    dropout_prob: float = 0.0
    false_positive_rate: float = 0.0
    overlap_entry_fraction: float = 1.0
    fps: float = 10.0
    width: int = 1280
    height: int = 960
    feature_dim: int = 32
    # topology == "custom": explicit graph plus the routes vehicles draw
    # from. cameras: [{camera_id, position, zone_id}]; edges: [{from, to,
    # tt_min, tt_max, overlap?}]; routes: [[camera_id, ...], ...]
    custom_graph: dict | None = None

    def __post_init__(self) -> None:
        if self.n_vehicles < 1 or self.n_cameras < 1 or self.frames_per_camera < 1:
            raise ScenarioConfigError("counts must be positive")
        if self.topology not in ("line", "grid", "custom"):
            raise ScenarioConfigError(f"unknown topology {self.topology!r}")
        if (self.topology == "custom") != (self.custom_graph is not None):
            raise ScenarioConfigError(
                "custom_graph must be supplied exactly when topology == 'custom'"
            )
        for name in ("dropout_prob", "false_positive_rate", "overlap_entry_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ScenarioConfigError(f"{name} must be in [0, 1], got {v}")
        for name in ("box_jitter_px", "feature_noise", "overlap_seconds"):
            if getattr(self, name) < 0:
                raise ScenarioConfigError(f"{name} must be >= 0")
        if self.travel_time_min_s > self.travel_time_max_s:
            raise ScenarioConfigError("travel_time_min_s > travel_time_max_s")
        if self.dwell_min_s > self.dwell_max_s:
            raise ScenarioConfigError("dwell_min_s > dwell_max_s")
        if self.fps <= 0:
            raise ScenarioConfigError("fps must be positive")
        if self.feature_dim < 2:
            raise ScenarioConfigError("feature_dim must be >= 2")
        if self.n_cameras > 1 and self.topology != "custom":
            if 0 < self.overlap_seconds < MIN_OVERLAP_S:
                raise ScenarioConfigError(
                    f"overlap_seconds below {MIN_OVERLAP_S}s cannot be expressed "
                    f"at the generator's discretization margins; use 0 or more"
                )
            if self.overlap_seconds > 0 and (
                self.dwell_min_s < self.travel_time_min_s + MIN_OVERLAP_S
            ):
                raise ScenarioConfigError(
                    "overlapping edges need dwell_min_s >= travel_time_min_s "
                    f"+ {MIN_OVERLAP_S}s so entry-before-exit is feasible"
                )
            if self.dwell_max_s > self.travel_time_max_s - 2 * EDGE_MARGIN_S:
                raise ScenarioConfigError(
                    "dwell_max_s too close to travel_time_max_s: non-overlap "
                    "traversals could not exit before the next entry"
                )

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ScenarioConfig":
        return cls(**doc)


@dataclass
class GroundTruth:
    """What the generator knows to be true, for oracles and evaluation."""

    trajectories: dict[str, list[Trajectory]]
    base_features: dict[int, np.ndarray]
    correspondence: dict[int, list[str]]
    visits: dict[int, list[tuple[str, float, float]]]  # vehicle -> (cam, st, et)

    def partition(self) -> set[frozenset[str]]:
        return {frozenset(uids) for uids in self.correspondence.values()}


@dataclass
class Scenario:
    config: ScenarioConfig
    ground_truth: GroundTruth
    detections: dict[str, list[Detection]]
    graph: CameraGraph
    metas: dict[str, CameraVideoMeta]

    def write(self, out_dir: Path | str) -> Path:
        """Emit the exact on-disk formats the ingest pipeline consumes."""
        out_dir = Path(out_dir)
        (out_dir / "cameras").mkdir(parents=True, exist_ok=True)
        (out_dir / "detections").mkdir(exist_ok=True)
        (out_dir / "gt").mkdir(exist_ok=True)

        (out_dir / "scenario.json").write_text(
            json.dumps(self.config.to_json_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        save_camera_graph(out_dir / "graph.json", self.graph)
        for cam_id in sorted(self.metas):
            save_camera_meta(out_dir / "cameras" / f"{cam_id}.meta.json", self.metas[cam_id])
            write_detections(
                out_dir / "detections" / f"{cam_id}.csv",
                self.detections[cam_id],
                feature_dim=self.config.feature_dim,
            )
            write_trajectories(
                out_dir / "gt" / f"{cam_id}.jsonl", self.ground_truth.trajectories[cam_id]
            )
        correspondence = {
            str(vid): uids for vid, uids in sorted(self.ground_truth.correspondence.items())
        }
        (out_dir / "gt" / "correspondence.json").write_text(
            json.dumps(correspondence, indent=1, sort_keys=True) + "\n", encoding="utf-8"
        )
        return out_dir


def _camera_grid_shape(n: int) -> tuple[int, int]:
    rows = max(d for d in range(1, int(math.isqrt(n)) + 1) if n % d == 0)
    return rows, n // rows


def _build_graph(cfg: ScenarioConfig) -> tuple[CameraGraph, list[list[str]]]:
    """Camera graph plus the pool of routes vehicles may take."""
    ids = [f"c{idx:03d}" for idx in range(cfg.n_cameras)]
    tt = (cfg.travel_time_min_s, cfg.travel_time_max_s)

    if cfg.topology == "custom":
        return _build_custom_graph(cfg)

    if cfg.topology == "line":
        cameras = [
            Camera(camera_id=cid, position=(200.0 * i, 0.0), zone_id=f"z{i}")
            for i, cid in enumerate(ids)
        ]
        edges = {(ids[i], ids[i + 1]): tt for i in range(len(ids) - 1)}
        overlaps = {
            (ids[i], ids[i + 1]): cfg.overlap_seconds for i in range(len(ids) - 1)
        }
        routes = [ids]
    else:  # grid
        rows, cols = _camera_grid_shape(cfg.n_cameras)
        cameras = []
        edges = {}
        overlaps = {}
        for r in range(rows):
            for c in range(cols):
                idx = r * cols + c
                cameras.append(
                    Camera(
                        camera_id=ids[idx],
                        position=(200.0 * c, 200.0 * r),
                        zone_id=f"z{idx}",
                    )
                )
        for r in range(rows):
            for c in range(cols):
                idx = r * cols + c
                if c + 1 < cols:
                    edges[(ids[idx], ids[idx + 1])] = tt
                    overlaps[(ids[idx], ids[idx + 1])] = cfg.overlap_seconds
                if r + 1 < rows:
                    edges[(ids[idx], ids[idx + cols])] = tt
                    overlaps[(ids[idx], ids[idx + cols])] = cfg.overlap_seconds
        routes = _monotone_grid_routes(ids, rows, cols)

    return CameraGraph(cameras, edges, overlaps), routes


def _build_custom_graph(cfg: ScenarioConfig) -> tuple[CameraGraph, list[list[str]]]:
    doc = cfg.custom_graph or {}
    try:
        cameras = [
            Camera(
                camera_id=c["camera_id"],
                position=(float(c["position"][0]), float(c["position"][1])),
                zone_id=str(c.get("zone_id", "")),
            )
            for c in doc["cameras"]
        ]
        edges = {}
        overlaps = {}
        for e in doc["edges"]:
            key = (e["from"], e["to"])
            edges[key] = (float(e["tt_min"]), float(e["tt_max"]))
            overlap = float(e.get("overlap", 0.0))
            if 0 < overlap < MIN_OVERLAP_S:
                raise ScenarioConfigError(
                    f"edge {key}: overlap {overlap}s below the {MIN_OVERLAP_S}s "
                    f"discretization floor"
                )
            if overlap > 0:
                overlaps[key] = overlap
        routes = [list(r) for r in doc["routes"]]
    except (KeyError, TypeError, IndexError) as exc:
        raise ScenarioConfigError(f"malformed custom_graph: {exc!r}") from None

    if len(cameras) != cfg.n_cameras:
        raise ScenarioConfigError(
            f"custom_graph declares {len(cameras)} cameras, config says {cfg.n_cameras}"
        )
    if not routes:
        raise ScenarioConfigError("custom_graph needs at least one route")
    graph = CameraGraph(cameras, edges, overlaps)
    for route in routes:
        if len(route) < 1:
            raise ScenarioConfigError("empty route in custom_graph")
        for a, b in zip(route, route[1:]):
            if (a, b) not in graph.edges:
                raise ScenarioConfigError(f"route step ({a}, {b}) has no edge")
    return graph, routes


def _monotone_grid_routes(ids: list[str], rows: int, cols: int) -> list[list[str]]:
    """All right/down staircase routes from the top-left to bottom-right."""
    routes: list[list[str]] = []

    def walk(r: int, c: int, acc: list[str]) -> None:
        acc = acc + [ids[r * cols + c]]
        if r == rows - 1 and c == cols - 1:
            routes.append(acc)
            return
        if c + 1 < cols:
            walk(r, c + 1, acc)
        if r + 1 < rows:
            walk(r + 1, c, acc)

    walk(0, 0, [])
    return routes


def _separated_unit_vectors(rng: np.random.Generator, n: int, dim: int) -> list[np.ndarray]:
    """Unit vectors kept at least MIN_FEATURE_ANGLE_DEG apart pairwise."""
    max_cos = math.cos(math.radians(MIN_FEATURE_ANGLE_DEG))
    vectors: list[np.ndarray] = []
    attempts = 0
    while len(vectors) < n:
        attempts += 1
        if attempts > 1000 * n:
            raise ScenarioConfigError(
                f"cannot place {n} features {MIN_FEATURE_ANGLE_DEG} degrees apart in dim {dim}"
            )
        v = rng.normal(size=dim)
        v /= np.linalg.norm(v)
        if all(float(np.dot(v, u)) < max_cos for u in vectors):
            vectors.append(v)
    return vectors


def _draw_travel(
    rng: np.random.Generator,
    cfg: ScenarioConfig,
    dwell: float,
    overlap: float,
    tt_min: float,
    tt_max: float,
) -> float:
    """Entry-to-entry travel time for one edge traversal.

    Overlapping edges force entry into the next camera before this one is
    exited (the vehicle is visible in both views for a while); otherwise
    entry happens strictly after exit.
    """
    lo_cfg = tt_min + EDGE_MARGIN_S
    hi_cfg = tt_max - EDGE_MARGIN_S
    use_overlap = overlap > 0 and rng.random() < cfg.overlap_entry_fraction
    if use_overlap:
        lo = max(lo_cfg, dwell - overlap + EDGE_MARGIN_S)
        hi = min(hi_cfg, dwell - EXIT_MARGIN_S)
    else:
        lo = max(lo_cfg, dwell + EDGE_MARGIN_S)
        hi = hi_cfg
    if lo > hi:
        raise ScenarioConfigError(
            f"infeasible travel window [{lo:.2f}, {hi:.2f}] for dwell {dwell:.2f}s, "
            f"overlap {overlap:.2f}s and travel bounds [{tt_min}, {tt_max}]s"
        )
    return float(rng.uniform(lo, hi))


def _sweep_path(
    rng: np.random.Generator, cfg: ScenarioConfig, box_w: float, box_h: float
) -> tuple[np.ndarray, np.ndarray]:
    """Start/end box centers of a straight sweep across the image."""
    margin_x = box_w / 2 + 4
    margin_y = box_h / 2 + 4
    y0 = rng.uniform(margin_y, cfg.height - margin_y)
    y1 = rng.uniform(margin_y, cfg.height - margin_y)
    span = cfg.width - 2 * margin_x
    if rng.random() < 0.5:
        start = np.array([margin_x, y0])
        end = np.array([margin_x + span, y1])
    else:
        start = np.array([margin_x + span, y0])
        end = np.array([margin_x, y1])
    return start, end


def _gt_box(
    center: np.ndarray, box_w: float, box_h: float, cfg: ScenarioConfig
) -> BoundingBox:
    return BoundingBox(
        x1=float(center[0] - box_w / 2),
        y1=float(center[1] - box_h / 2),
        x2=float(center[0] + box_w / 2),
        y2=float(center[1] + box_h / 2),
    ).clamped(cfg.width, cfg.height)


def generate(cfg: ScenarioConfig) -> Scenario:
    """Build one deterministic scenario from the seed."""
    rng = np.random.default_rng(cfg.seed)
    graph, routes = _build_graph(cfg)
    horizon = cfg.frames_per_camera / cfg.fps

    base_features = _separated_unit_vectors(rng, cfg.n_vehicles, cfg.feature_dim)

    # Route plan first: entry/exit times per camera, sequential from the seed.
    journey_max = cfg.dwell_max_s + max(
        sum(graph.edges[(a, b)][1] for a, b in zip(route, route[1:]))
        for route in routes
    )
    t0_max = horizon - journey_max - 1.0
    if t0_max <= 0.5:
        raise ScenarioConfigError(
            f"frame budget {cfg.frames_per_camera} ({horizon:.1f}s) cannot hold a "
            f"{journey_max:.1f}s journey; raise frames_per_camera or tighten travel bounds"
        )

    visits: dict[int, list[tuple[str, float, float]]] = {}
    for vid in range(1, cfg.n_vehicles + 1):
        route = routes[rng.integers(len(routes))]
        st = float(rng.uniform(0.5, t0_max))
        plan = []
        for hop, cam_id in enumerate(route):
            dwell = float(rng.uniform(cfg.dwell_min_s, cfg.dwell_max_s))
            plan.append((cam_id, st, st + dwell))
            if hop + 1 < len(route):
                nxt = route[hop + 1]
                tt_min, tt_max = graph.edges[(cam_id, nxt)]
                overlap = graph.overlap(cam_id, nxt)
                st = st + _draw_travel(rng, cfg, dwell, overlap, tt_min, tt_max)
        visits[vid] = plan

    # Per-camera ground-truth trajectories as dense box sweeps.
    gt_trajectories: dict[str, list[Trajectory]] = {c: [] for c in graph.cameras}
    correspondence: dict[int, list[str]] = {vid: [] for vid in visits}
    paths: dict[tuple[int, str], tuple[np.ndarray, np.ndarray, float, float]] = {}

    for vid, plan in visits.items():
        for cam_id, st, et in plan:
            box_w = float(rng.uniform(70, 120))
            box_h = float(rng.uniform(50, 90))
            start, end = _sweep_path(rng, cfg, box_w, box_h)
            paths[(vid, cam_id)] = (start, end, box_w, box_h)

            f_start = math.ceil(st * cfg.fps)
            f_end = math.floor(et * cfg.fps)
            if f_end >= cfg.frames_per_camera:
                raise ScenarioConfigError(
                    f"vehicle {vid} exits {cam_id} at frame {f_end}, beyond the clip"
                )
            boxes = {}
            for frame in range(f_start, f_end + 1):
                t = (frame / cfg.fps - st) / (et - st)
                center = start + t * (end - start)
                boxes[frame] = _gt_box(center, box_w, box_h, cfg)
            feature = base_features[vid - 1]
            traj = Trajectory(
                trajectory_id=vid,
                camera_id=cam_id,
                boxes=boxes,
                st=f_start / cfg.fps,
                et=f_end / cfg.fps,
                feature=np.asarray(feature, dtype=np.float64),
                frame_features=[np.asarray(feature, dtype=np.float64)],
                n_key_frames=len(boxes),
            )
            gt_trajectories[cam_id].append(traj)
            correspondence[vid].append(traj.uid)

    # Noisy detections, generated camera by camera in frame order.
    detections: dict[str, list[Detection]] = {}
    metas: dict[str, CameraVideoMeta] = {}
    for cam_id in sorted(graph.cameras):
        metas[cam_id] = CameraVideoMeta(
            camera_id=cam_id,
            clip_uri=f"clips/{cam_id}.mp4",
            frame_count=cfg.frames_per_camera,
            width=cfg.width,
            height=cfg.height,
            fps=cfg.fps,
        )
        cam_dets: list[Detection] = []
        det_id = 0
        by_frame: dict[int, list[tuple[int, BoundingBox]]] = {}
        for traj in gt_trajectories[cam_id]:
            for frame, box in traj.boxes.items():
                by_frame.setdefault(frame, []).append((traj.trajectory_id, box))

        for frame in range(cfg.frames_per_camera):
            for vid, box in sorted(by_frame.get(frame, []), key=lambda p: p[0]):
                if cfg.dropout_prob > 0 and rng.random() < cfg.dropout_prob:
                    continue
                if cfg.box_jitter_px > 0:
                    dx, dy = rng.normal(0.0, cfg.box_jitter_px, size=2)
                    box = BoundingBox(
                        box.x1 + dx, box.y1 + dy, box.x2 + dx, box.y2 + dy
                    ).clamped(cfg.width, cfg.height)
                feat = np.asarray(base_features[vid - 1], dtype=np.float64)
                if cfg.feature_noise > 0:
                    feat = feat + rng.normal(0.0, cfg.feature_noise, size=cfg.feature_dim)
                    feat = feat / np.linalg.norm(feat)
                cam_dets.append(
                    Detection(
                        camera_id=cam_id,
                        frame=frame,
                        box=box,
                        confidence=float(rng.uniform(0.55, 1.0)),
                        feature=feat.astype(np.float32),
                        detection_id=det_id,
                    )
                )
                det_id += 1
            if cfg.false_positive_rate > 0:
                for _ in range(int(rng.poisson(cfg.false_positive_rate))):
                    w = float(rng.uniform(40, 120))
                    h = float(rng.uniform(30, 90))
                    cx = float(rng.uniform(w / 2, cfg.width - w / 2))
                    cy = float(rng.uniform(h / 2, cfg.height - h / 2))
                    feat = rng.normal(size=cfg.feature_dim)
                    feat = feat / np.linalg.norm(feat)
                    cam_dets.append(
                        Detection(
                            camera_id=cam_id,
                            frame=frame,
                            box=_gt_box(np.array([cx, cy]), w, h, cfg),
                            confidence=float(rng.uniform(0.05, 0.6)),
                            feature=feat.astype(np.float32),
                            detection_id=det_id,
                        )
                    )
                    det_id += 1
        detections[cam_id] = cam_dets

    ground_truth = GroundTruth(
        trajectories=gt_trajectories,
        base_features={vid: base_features[vid - 1] for vid in visits},
        correspondence=correspondence,
        visits=visits,
    )
    return Scenario(
        config=cfg,
        ground_truth=ground_truth,
        detections=detections,
        graph=graph,
        metas=metas,
    )


@dataclass(frozen=True)
class SweepRow:
    interval: int
    wall_time_s: float
    recall: float
    precision: float


def sweep_intervals(
    cfg: ScenarioConfig | Scenario,
    intervals: Sequence[int],
    sampling: SamplingConfig | None = None,
    assoc: AssociationConfig | None = None,
) -> list[SweepRow]:
    """Run the tracking pipeline at each key-frame interval and report the
    runtime/recall trade-off against the scenario's ground truth.

    Accepts either a config (the scenario is regenerated deterministically)
    or an already-generated Scenario.
    """
    if any(i < 1 for i in intervals):
        raise ValueError("intervals must be >= 1")
    scenario = cfg if isinstance(cfg, Scenario) else generate(cfg)
    base = sampling or SamplingConfig(fps=scenario.config.fps)
    assoc = assoc or AssociationConfig()

    rows = []
    for interval in intervals:
        cfg = SamplingConfig(
            interval=interval,
            fps=base.fps,
            confidence_threshold=base.confidence_threshold,
        )
        start = time.perf_counter()
        preds = {
            cam_id: track_camera(dets, scenario.metas[cam_id], cfg, assoc)
            for cam_id, dets in scenario.detections.items()
        }
        elapsed = time.perf_counter() - start
        report = evaluate_cameras(preds, scenario.ground_truth.trajectories)
        rows.append(
            SweepRow(
                interval=interval,
                wall_time_s=elapsed,
                recall=report.recall,
                precision=report.precision,
            )
        )
    return rows


def write_sweep_csv(path: Path | str, rows: Sequence[SweepRow]) -> None:
    lines = ["interval,wall_time_s,recall_pct,precision_pct"]
    for row in rows:
        lines.append(
            f"{row.interval},{row.wall_time_s:.3f},"
            f"{100.0 * row.recall:.2f},{100.0 * row.precision:.2f}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class ScenarioData:
    """A scenario directory loaded back from disk."""

    config: ScenarioConfig
    graph: CameraGraph
    metas: dict[str, CameraVideoMeta]
    detections: dict[str, list[Detection]]
    gt_trajectories: dict[str, list[Trajectory]]
    correspondence: dict[int, list[str]]


def load_scenario_dir(directory: Path | str) -> ScenarioData:
    directory = Path(directory)
    config = ScenarioConfig.from_json_dict(
        json.loads((directory / "scenario.json").read_text(encoding="utf-8"))
    )
    graph = load_camera_graph(directory / "graph.json")
    metas = {}
    detections = {}
    gt = {}
    for meta_path in sorted((directory / "cameras").glob("*.meta.json")):
        meta = load_camera_meta(meta_path)
        metas[meta.camera_id] = meta
        detections[meta.camera_id] = parse_detections(
            directory / "detections" / f"{meta.camera_id}.csv", meta
        )
        gt[meta.camera_id] = read_trajectories(directory / "gt" / f"{meta.camera_id}.jsonl")
    correspondence = {
        int(vid): uids
        for vid, uids in json.loads(
            (directory / "gt" / "correspondence.json").read_text(encoding="utf-8")
        ).items()
    }
    return ScenarioData(
        config=config,
        graph=graph,
        metas=metas,
        detections=detections,
        gt_trajectories=gt,
        correspondence=correspondence,
    )


__all__ = [
    "GroundTruth",
    "Scenario",
    "ScenarioConfig",
    "ScenarioConfigError",
    "ScenarioData",
    "SweepRow",
    "generate",
    "load_scenario_dir",
    "sweep_intervals",
    "write_sweep_csv",
]
