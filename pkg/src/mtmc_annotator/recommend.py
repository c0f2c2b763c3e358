"""Cross-camera match recommendation for a query trajectory.

Builds the candidate list in stages: a per-camera time-window scan whose
search origin is shifted by the field-of-view overlap with the query
camera, a union over the gallery cameras, topology/travel-time pruning on
the camera graph, and a final ranking for human review.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .tracker import Trajectory, cosine_distance

RANK_MODES = ("time", "appearance", "blend")


@dataclass(frozen=True)
class Camera:
    """A camera node: planar position in meters plus its traffic zone."""

    camera_id: str
    position: tuple[float, float]
    zone_id: str = ""


@dataclass(frozen=True)
class TimeWindow:
    """Inclusive candidate window on d = st_candidate - st_search.

    min_offset may be negative: under field-of-view overlap a candidate is
    allowed to enter the downstream camera before the query entry.
    """

    min_offset: float
    max_offset: float

    def __post_init__(self) -> None:
        if self.min_offset > self.max_offset:
            raise ValueError(
                f"min_offset {self.min_offset} > max_offset {self.max_offset}"
            )

    def contains(self, d: float) -> bool:
        return self.min_offset <= d <= self.max_offset


@dataclass(eq=False)
class Candidate:
    """One gallery trajectory offered for matching against the query."""

    trajectory: Trajectory
    time_offset: float
    appearance_distance: float
    camera_id: str

    @property
    def uid(self) -> str:
        return self.trajectory.uid


class CameraGraph:
    """Cameras with directed reachability edges, travel-time bounds in
    seconds and symmetric field-of-view overlap durations."""

    def __init__(
        self,
        cameras: Iterable[Camera],
        edges: Mapping[tuple[str, str], tuple[float, float]] | None = None,
        overlaps: Mapping[tuple[str, str], float] | None = None,
    ) -> None:
        self.cameras: dict[str, Camera] = {c.camera_id: c for c in cameras}
        self.edges: dict[tuple[str, str], tuple[float, float]] = {}
        self._overlaps: dict[frozenset[str], float] = {}

        for (a, b), (tt_min, tt_max) in (edges or {}).items():
            if a not in self.cameras or b not in self.cameras:
                raise ValueError(f"edge ({a}, {b}) references unknown camera")
            if tt_min > tt_max:
                raise ValueError(f"edge ({a}, {b}): tt_min {tt_min} > tt_max {tt_max}")
            self.edges[(a, b)] = (float(tt_min), float(tt_max))

        for (a, b), seconds in (overlaps or {}).items():
            if a not in self.cameras or b not in self.cameras:
                raise ValueError(f"overlap ({a}, {b}) references unknown camera")
            if seconds < 0:
                raise ValueError(f"overlap ({a}, {b}) negative: {seconds}")
            self._overlaps[frozenset((a, b))] = float(seconds)

    def __contains__(self, camera_id: str) -> bool:
        return camera_id in self.cameras

    def overlap(self, a: str, b: str) -> float:
        """Seconds of field-of-view overlap between two cameras (0 if none)."""
        return self._overlaps.get(frozenset((a, b)), 0.0)

    def overlap_pairs(self) -> list[tuple[str, str, float]]:
        return sorted(
            (*sorted(pair), seconds) for pair, seconds in self._overlaps.items()
        )

    def successors(self, camera_id: str) -> list[str]:
        return [b for (a, b) in self.edges if a == camera_id]

    def predecessors(self, camera_id: str) -> list[str]:
        return [a for (a, b) in self.edges if b == camera_id]

    def zone_cameras(self, zone_id: str) -> set[str]:
        return {c.camera_id for c in self.cameras.values() if c.zone_id == zone_id}


def csg(
    st_sch: float,
    gallery: Sequence[Trajectory],
    window: TimeWindow,
    query_feature=None,
) -> list[Candidate]:
    """Windowed sorted gallery for one camera.

    Emits exactly the gallery trajectories whose start-time offset
    d = st - st_sch lies inside the inclusive window, ascending by d with
    ties broken by trajectory_id.
    """
    cameras = {t.camera_id for t in gallery}
    if len(cameras) > 1:
        raise ValueError(f"gallery spans multiple cameras: {sorted(cameras)}")

    out = []
    for traj in gallery:
        d = traj.st - st_sch
        if window.contains(d):
            dist = (
                cosine_distance(query_feature, traj.feature)
                if query_feature is not None
                else 0.0
            )
            out.append(
                Candidate(
                    trajectory=traj,
                    time_offset=d,
                    appearance_distance=dist,
                    camera_id=traj.camera_id,
                )
            )
    out.sort(key=lambda c: (c.time_offset, c.trajectory.trajectory_id))
    return out


def time_constrained_gallery(
    query: Trajectory,
    graph: CameraGraph,
    gallery_cams: Sequence[str],
    per_cam_galleries: Mapping[str, Sequence[Trajectory]],
    window: TimeWindow,
    extend_by_query_span: bool = False,
) -> list[Candidate]:
    """Union of per-camera windowed galleries with the overlap offset applied.

    For a gallery camera whose field of view overlaps the query camera the
    search origin moves back by the overlap duration, admitting targets that
    entered the downstream view before leaving the query view.

    extend_by_query_span widens the upper bound to (et - st) + max_offset,
    anchoring the window at the query's exit rather than its entry; off by
    default.
    """
    if query.camera_id not in graph:
        raise ValueError(f"query camera {query.camera_id!r} not in graph")

    if extend_by_query_span:
        window = TimeWindow(
            window.min_offset, (query.et - query.st) + window.max_offset
        )

    seen: set[str] = set()
    out: list[Candidate] = []
    for cam in gallery_cams:
        if cam not in graph:
            raise ValueError(f"gallery camera {cam!r} not in graph")
        overlap = graph.overlap(cam, query.camera_id)
        st_sch = query.st - overlap if overlap > 0 else query.st
        for cand in csg(st_sch, per_cam_galleries.get(cam, []), window, query.feature):
            if cand.uid not in seen:
                seen.add(cand.uid)
                out.append(cand)
    return out


def _walk_bounds(
    graph: CameraGraph, src: str, hops: int, reverse: bool
) -> dict[str, tuple[float, float]]:
    """Cumulative [min, max] travel-time sums over directed walks of length
    <= hops starting (or, reversed, ending) at src. Walks rather than simple
    paths: the bound only widens, so the prune stays match-safe."""
    best: dict[str, tuple[float, float]] = {}
    current: dict[str, tuple[float, float]] = {src: (0.0, 0.0)}
    for _ in range(hops):
        nxt: dict[str, tuple[float, float]] = {}
        for cam, (lo, hi) in current.items():
            for (a, b), (tt_min, tt_max) in graph.edges.items():
                tail, head = (b, a) if reverse else (a, b)
                if tail != cam:
                    continue
                cand = (lo + tt_min, hi + tt_max)
                if head in nxt:
                    prev = nxt[head]
                    cand = (min(prev[0], cand[0]), max(prev[1], cand[1]))
                nxt[head] = cand
        for cam, (lo, hi) in nxt.items():
            if cam in best:
                plo, phi = best[cam]
                best[cam] = (min(plo, lo), max(phi, hi))
            else:
                best[cam] = (lo, hi)
        current = nxt
    return best


def _reachable_between(graph: CameraGraph, sources: set[str], targets: set[str]) -> set[str]:
    """Cameras lying on some directed walk from any source to any target."""

    def closure(seeds: set[str], reverse: bool) -> set[str]:
        seen = set(seeds)
        frontier = list(seeds)
        while frontier:
            cam = frontier.pop()
            neighbors = (
                graph.predecessors(cam) if reverse else graph.successors(cam)
            )
            for nb in neighbors:
                if nb not in seen:
                    seen.add(nb)
                    frontier.append(nb)
        return seen

    return closure(sources, reverse=False) & closure(targets, reverse=True)


def topology_prune(
    candidates: Sequence[Candidate],
    query: Trajectory,
    graph: CameraGraph,
    direction_hint: tuple[str, str] | None = None,
    hops: int = 1,
) -> list[Candidate]:
    """Remove candidates the camera topology rules out.

    A candidate survives only if its camera is reachable from (or can reach)
    the query camera within the hop budget, its |d| fits the accumulated
    travel-time bounds widened by the pairwise overlap, and, when a zone
    transition hint (from_zone, to_zone) is given, its camera lies in a zone
    on some path consistent with that transition.
    """
    if hops < 1:
        raise ValueError("hop budget must be >= 1")

    forward = _walk_bounds(graph, query.camera_id, hops, reverse=False)
    backward = _walk_bounds(graph, query.camera_id, hops, reverse=True)

    allowed_zones: set[str] | None = None
    if direction_hint is not None:
        from_zone, to_zone = direction_hint
        on_path = _reachable_between(
            graph, graph.zone_cameras(from_zone), graph.zone_cameras(to_zone)
        )
        allowed_zones = {graph.cameras[c].zone_id for c in on_path}

    kept = []
    for cand in candidates:
        overlap = graph.overlap(query.camera_id, cand.camera_id)
        feasible = False
        for bounds in (forward.get(cand.camera_id), backward.get(cand.camera_id)):
            if bounds is None:
                continue
            lo, hi = bounds
            if lo - overlap <= abs(cand.time_offset) <= hi + overlap:
                feasible = True
                break
        if not feasible:
            continue
        if allowed_zones is not None:
            zone = graph.cameras[cand.camera_id].zone_id
            if zone not in allowed_zones:
                continue
        kept.append(cand)
    return kept


def rank(
    candidates: Sequence[Candidate],
    query: Trajectory,
    mode: str = "blend",
    alpha: float = 0.3,
    max_abs_offset: float | None = None,
) -> list[Candidate]:
    """Order candidates for review; a permutation of the input.

    time: ascending |d|. appearance: ascending cosine distance. blend:
    alpha * |d|/max_abs_offset + (1-alpha) * cosine distance, with
    max_abs_offset defaulting to the largest |d| present.
    """
    if mode not in RANK_MODES:
        raise ValueError(f"unknown ranking mode {mode!r}; expected one of {RANK_MODES}")

    scale = max_abs_offset
    if scale is None:
        scale = max((abs(c.time_offset) for c in candidates), default=1.0)
    scale = scale or 1.0

    def score(c: Candidate) -> float:
        if mode == "time":
            return abs(c.time_offset)
        if mode == "appearance":
            return c.appearance_distance
        return alpha * abs(c.time_offset) / scale + (1.0 - alpha) * c.appearance_distance

    return sorted(candidates, key=lambda c: (score(c), c.trajectory.trajectory_id))


def load_camera_graph(path: Path | str) -> CameraGraph:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    cameras = [
        Camera(
            camera_id=c["camera_id"],
            position=(float(c["position"][0]), float(c["position"][1])),
            zone_id=str(c.get("zone_id", "")),
        )
        for c in doc["cameras"]
    ]
    edges = {
        (e["from"], e["to"]): (float(e["tt_min"]), float(e["tt_max"]))
        for e in doc.get("edges", [])
    }
    overlaps = {
        (o["a"], o["b"]): float(o["seconds"]) for o in doc.get("overlaps", [])
    }
    return CameraGraph(cameras, edges, overlaps)


def save_camera_graph(path: Path | str, graph: CameraGraph) -> None:
    doc = {
        "cameras": [
            {
                "camera_id": c.camera_id,
                "position": [c.position[0], c.position[1]],
                "zone_id": c.zone_id,
            }
            for c in sorted(graph.cameras.values(), key=lambda c: c.camera_id)
        ],
        "edges": [
            {"from": a, "to": b, "tt_min": lo, "tt_max": hi}
            for (a, b), (lo, hi) in sorted(graph.edges.items())
        ],
        "overlaps": [
            {"a": a, "b": b, "seconds": seconds}
            for a, b, seconds in graph.overlap_pairs()
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


__all__ = [
    "Camera",
    "CameraGraph",
    "Candidate",
    "RANK_MODES",
    "TimeWindow",
    "csg",
    "load_camera_graph",
    "rank",
    "save_camera_graph",
    "time_constrained_gallery",
    "topology_prune",
]
