"""Versioned annotation store for cross-camera identity assignment.

Trajectories are registered once, then matched into global vehicle
identities. Every mutation is appended to a JSON-lines event log and bumps
the touched record's version; human-facing writes can pass an expected
version for optimistic concurrency. Overlay payloads are generated on
demand from the stored boxes so no annotated video ever needs rendering.
"""

from __future__ import annotations

import colorsys
import json
import queue
import threading
import time
import zlib
from concurrent.futures import Future
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .ingest import BoundingBox, CameraVideoMeta
from .tracker import Trajectory

EVENT_LOG_NAME = "events.jsonl"
SNAPSHOT_NAME = "snapshot.json"
BOX_DECIMALS = 2  # sub-centipixel precision buys nothing and bloats the log


class NotFoundError(KeyError):
    """Referenced trajectory or identity does not exist in the store."""


class VersionConflictError(Exception):
    """Optimistic write lost: the record moved past the expected version."""

    def __init__(self, expected: int, current: int) -> None:
        super().__init__(f"expected version {expected}, store has {current}")
        self.expected = expected
        self.current = current


@dataclass(frozen=True)
class TrajectoryRecord:
    """Compact persisted form of one single-camera trajectory."""

    trajectory_id: int
    camera_id: str
    clip_uri: str
    t_s: float
    t_e: float
    fps: float
    boxes: tuple[tuple[int, float, float, float, float], ...]
    orientation: tuple[float, float]
    feature: tuple[float, ...]

    @property
    def uid(self) -> str:
        return f"{self.camera_id}:{self.trajectory_id}"

    @classmethod
    def from_trajectory(
        cls, traj: Trajectory, clip_uri: str, fps: float
    ) -> "TrajectoryRecord":
        boxes = tuple(
            (
                int(f),
                round(b.x1, BOX_DECIMALS),
                round(b.y1, BOX_DECIMALS),
                round(b.x2, BOX_DECIMALS),
                round(b.y2, BOX_DECIMALS),
            )
            for f, b in sorted(traj.boxes.items())
        )
        return cls(
            trajectory_id=traj.trajectory_id,
            camera_id=traj.camera_id,
            clip_uri=clip_uri,
            t_s=traj.st,
            t_e=traj.et,
            fps=fps,
            boxes=boxes,
            orientation=(float(traj.orientation[0]), float(traj.orientation[1])),
            feature=tuple(round(float(v), 6) for v in traj.feature),
        )

    def to_trajectory(self) -> Trajectory:
        return Trajectory(
            trajectory_id=self.trajectory_id,
            camera_id=self.camera_id,
            boxes={f: BoundingBox(x1, y1, x2, y2) for f, x1, y1, x2, y2 in self.boxes},
            st=self.t_s,
            et=self.t_e,
            feature=np.asarray(self.feature, dtype=np.float64),
            orientation=np.asarray(self.orientation, dtype=np.float64),
        )

    def to_json_dict(self) -> dict:
        return {
            "trajectory_id": self.trajectory_id,
            "camera_id": self.camera_id,
            "clip_uri": self.clip_uri,
            "t_s": self.t_s,
            "t_e": self.t_e,
            "fps": self.fps,
            "boxes": [list(b) for b in self.boxes],
            "orientation": list(self.orientation),
            "feature": list(self.feature),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "TrajectoryRecord":
        return cls(
            trajectory_id=int(doc["trajectory_id"]),
            camera_id=doc["camera_id"],
            clip_uri=doc["clip_uri"],
            t_s=float(doc["t_s"]),
            t_e=float(doc["t_e"]),
            fps=float(doc["fps"]),
            boxes=tuple(
                (int(b[0]), float(b[1]), float(b[2]), float(b[3]), float(b[4]))
                for b in doc["boxes"]
            ),
            orientation=(float(doc["orientation"][0]), float(doc["orientation"][1])),
            feature=tuple(float(v) for v in doc["feature"]),
        )


@dataclass
class AnnotationRecord:
    """One global vehicle identity and the trajectories assigned to it."""

    global_id: int
    members: set[str]
    version: int
    history: list[tuple[str, str, float]] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "global_id": self.global_id,
            "members": sorted(self.members),
            "version": self.version,
            "history": [list(h) for h in self.history],
        }


@dataclass(frozen=True)
class OverlayBox:
    frame: int
    x1: float
    y1: float
    x2: float
    y2: float
    global_id: int | None
    color: str
    trajectory_uid: str


@dataclass(frozen=True)
class OverlayPayload:
    """Frame-indexed box metadata for client-side drawing over one clip."""

    clip_uri: str
    fps: float
    frames: tuple[tuple[int, tuple[OverlayBox, ...]], ...]

    def box_count(self) -> int:
        return sum(len(boxes) for _, boxes in self.frames)

    def to_json_dict(self) -> dict:
        return {
            "clip_uri": self.clip_uri,
            "fps": self.fps,
            "frames": [
                {
                    "frame": frame,
                    "boxes": [
                        {
                            "x1": b.x1,
                            "y1": b.y1,
                            "x2": b.x2,
                            "y2": b.y2,
                            "global_id": b.global_id,
                            "color": b.color,
                            "trajectory_uid": b.trajectory_uid,
                        }
                        for b in boxes
                    ],
                }
                for frame, boxes in self.frames
            ],
        }


def identity_color(key: int | str) -> str:
    """Deterministic display color: stable 32-bit hash -> HSV hue -> hex."""
    hue = (zlib.crc32(str(key).encode("utf-8")) % 360) / 360.0
    r, g, b = colorsys.hsv_to_rgb(hue, 0.85, 0.95)
    return f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}"


@dataclass(frozen=True)
class StorageReport:
    annotation_bytes: int
    naive_render_bytes: int
    ratio: float
    bitrate_baseline_bytes: int
    bitrate_ratio: float


class AnnotationStore:
    """In-memory annotation state with an append-only JSON-lines event log.

    Mutations are serialized by an internal lock; services additionally
    funnel writes through a single SerializedWriter queue. Readers always
    see a consistent snapshot.
    """

    def __init__(
        self,
        log_path: Path | str | None = None,
        clock: Callable[[], float] | None = None,
        snapshot_every: int = 0,
    ) -> None:
        self._lock = threading.RLock()
        self._clock = clock or time.time
        self._records: dict[str, TrajectoryRecord] = {}
        self._cameras: dict[str, CameraVideoMeta] = {}
        self._annotations: dict[int, AnnotationRecord] = {}
        self._assignment: dict[str, int] = {}
        self._next_gid = 1
        self._seq = 0
        self._log_path = Path(log_path) if log_path is not None else None
        self._snapshot_every = snapshot_every
        if self._log_path is not None:
            self._log_path.parent.mkdir(parents=True, exist_ok=True)

    # ------------------------------------------------------------------ events

    def _append_event(self, op: str, payload: dict, user: str) -> None:
        self._seq += 1
        if self._log_path is None:
            return
        event = {
            "seq": self._seq,
            "op": op,
            "payload": payload,
            "user": user,
            "ts": self._clock(),
        }
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
        # Periodic snapshot: replay after a crash only walks the log tail.
        if self._snapshot_every > 0 and self._seq % self._snapshot_every == 0:
            self.save_snapshot(self._log_path.parent)

    # --------------------------------------------------------------- registry

    def register_camera(self, meta: CameraVideoMeta, user: str = "system") -> None:
        with self._lock:
            existing = self._cameras.get(meta.camera_id)
            if existing == meta:
                return
            if existing is not None:
                raise ValueError(
                    f"camera {meta.camera_id!r} already registered with different meta"
                )
            self._cameras[meta.camera_id] = meta
            self._append_event(
                "register_camera",
                {
                    "camera_id": meta.camera_id,
                    "clip_uri": meta.clip_uri,
                    "frame_count": meta.frame_count,
                    "width": meta.width,
                    "height": meta.height,
                    "fps": meta.fps,
                },
                user,
            )

    def register_trajectory(self, record: TrajectoryRecord, user: str = "system") -> None:
        """Add a trajectory record; identical re-registration is a no-op."""
        with self._lock:
            existing = self._records.get(record.uid)
            if existing == record:
                return
            if existing is not None:
                raise ValueError(
                    f"trajectory {record.uid} already registered with different content"
                )
            self._records[record.uid] = record
            self._append_event("register_trajectory", record.to_json_dict(), user)

    def cameras(self) -> list[CameraVideoMeta]:
        with self._lock:
            return sorted(self._cameras.values(), key=lambda m: m.camera_id)

    def camera(self, camera_id: str) -> CameraVideoMeta:
        with self._lock:
            if camera_id not in self._cameras:
                raise NotFoundError(camera_id)
            return self._cameras[camera_id]

    def trajectory(self, uid: str) -> TrajectoryRecord:
        with self._lock:
            if uid not in self._records:
                raise NotFoundError(uid)
            return self._records[uid]

    def trajectories(self, camera_id: str | None = None) -> list[TrajectoryRecord]:
        with self._lock:
            records = [
                r
                for r in self._records.values()
                if camera_id is None or r.camera_id == camera_id
            ]
            return sorted(records, key=lambda r: (r.camera_id, r.trajectory_id))

    def galleries(self) -> dict[str, list[Trajectory]]:
        """Per-camera trajectory lists for the recommender."""
        with self._lock:
            out: dict[str, list[Trajectory]] = {}
            for record in self._records.values():
                out.setdefault(record.camera_id, []).append(record.to_trajectory())
            for trajs in out.values():
                trajs.sort(key=lambda t: t.trajectory_id)
            return out

    # ------------------------------------------------------------- annotation

    def assignment_of(self, uid: str) -> int | None:
        with self._lock:
            return self._assignment.get(uid)

    def annotation(self, global_id: int) -> AnnotationRecord:
        with self._lock:
            if global_id not in self._annotations:
                raise NotFoundError(str(global_id))
            return self._annotations[global_id]

    def annotations(self) -> list[AnnotationRecord]:
        with self._lock:
            return [self._annotations[g] for g in sorted(self._annotations)]

    def current_version(self, uid: str) -> int:
        """Version of the record a trajectory belongs to; 0 when unassigned."""
        with self._lock:
            gid = self._assignment.get(uid)
            return self._annotations[gid].version if gid is not None else 0

    def partition(self) -> set[frozenset[str]]:
        """The store's identity partition as a set of member sets."""
        with self._lock:
            return {frozenset(rec.members) for rec in self._annotations.values()}

    def submit_match(
        self,
        query_uid: str,
        candidate_uid: str,
        user: str,
        expected_version: int | None = None,
    ) -> AnnotationRecord:
        """Assert that two trajectories are the same physical vehicle.

        expected_version, when given, is checked against the version of the
        record the query trajectory currently belongs to (0 if unassigned).
        """
        with self._lock:
            if query_uid not in self._records:
                raise NotFoundError(query_uid)
            if candidate_uid not in self._records:
                raise NotFoundError(candidate_uid)
            if query_uid == candidate_uid:
                raise ValueError(f"cannot match trajectory {query_uid} to itself")

            current = self.current_version(query_uid)
            if expected_version is not None and expected_version != current:
                raise VersionConflictError(expected_version, current)

            ts = self._clock()
            gid_q = self._assignment.get(query_uid)
            gid_c = self._assignment.get(candidate_uid)

            if gid_q is None and gid_c is None:
                gid = self._next_gid
                self._next_gid += 1
                record = AnnotationRecord(
                    global_id=gid,
                    members={query_uid, candidate_uid},
                    version=1,
                    history=[(user, f"match {query_uid}+{candidate_uid}", ts)],
                )
                self._annotations[gid] = record
                self._assignment[query_uid] = gid
                self._assignment[candidate_uid] = gid
            elif gid_q is not None and gid_c is not None:
                if gid_q == gid_c:
                    # Accepted but redundant; logged so the event log still
                    # mirrors every acknowledged write one-to-one.
                    self._append_event(
                        "match", {"query": query_uid, "candidate": candidate_uid}, user
                    )
                    return self._annotations[gid_q]
                keep, drop = sorted((gid_q, gid_c))
                kept = self._annotations[keep]
                dropped = self._annotations.pop(drop)
                kept.members |= dropped.members
                kept.history.extend(dropped.history)
                kept.version = max(kept.version, dropped.version) + 1
                kept.history.append((user, f"merge {drop}->{keep}", ts))
                for uid in dropped.members:
                    self._assignment[uid] = keep
                record = kept
            else:
                gid = gid_q if gid_q is not None else gid_c
                joiner = candidate_uid if gid_q is not None else query_uid
                record = self._annotations[gid]
                record.members.add(joiner)
                record.version += 1
                record.history.append((user, f"join {joiner}", ts))
                self._assignment[joiner] = gid

            self._append_event(
                "match", {"query": query_uid, "candidate": candidate_uid}, user
            )
            return record

    def create_identity(self, members: Sequence[str], user: str) -> AnnotationRecord:
        """Create a fresh identity over currently unassigned trajectories.

        Used by dataset import, where single-member identities (a legal
        result of unmatching) cannot be rebuilt through submit_match.
        """
        with self._lock:
            if not members:
                raise ValueError("an identity needs at least one member")
            for uid in members:
                if uid not in self._records:
                    raise NotFoundError(uid)
                if uid in self._assignment:
                    raise ValueError(f"{uid} is already assigned")
            gid = self._next_gid
            self._next_gid += 1
            record = AnnotationRecord(
                global_id=gid,
                members=set(members),
                version=1,
                history=[(user, f"create {'+'.join(sorted(members))}", self._clock())],
            )
            self._annotations[gid] = record
            for uid in members:
                self._assignment[uid] = gid
            self._append_event("create_identity", {"members": sorted(members)}, user)
            return record

    def unmatch(
        self,
        uid: str,
        user: str,
        expected_version: int | None = None,
    ) -> AnnotationRecord | None:
        """Remove a trajectory from its identity; returns the surviving
        record, or None when the record was deleted."""
        with self._lock:
            if uid not in self._records:
                raise NotFoundError(uid)
            gid = self._assignment.get(uid)
            if gid is None:
                raise NotFoundError(f"{uid} is not assigned to any identity")

            record = self._annotations[gid]
            if expected_version is not None and expected_version != record.version:
                raise VersionConflictError(expected_version, record.version)

            ts = self._clock()
            record.members.discard(uid)
            del self._assignment[uid]
            self._append_event("unmatch", {"trajectory": uid}, user)

            if not record.members:
                del self._annotations[gid]
                return None
            record.version += 1
            record.history.append((user, f"unmatch {uid}", ts))
            return record

    # ---------------------------------------------------------------- overlay

    def build_overlay(
        self,
        ref: str | int,
        from_s: float | None = None,
        to_s: float | None = None,
    ) -> list[OverlayPayload]:
        """Overlay payloads for a trajectory uid or a global identity.

        One payload per distinct clip; only boxes whose frame times intersect
        [from_s, to_s] are included. Boxes are emitted verbatim from the
        stored records.
        """
        with self._lock:
            if isinstance(ref, int) or (isinstance(ref, str) and ref.isdigit()):
                gid = int(ref)
                if gid not in self._annotations:
                    raise NotFoundError(str(ref))
                uids = sorted(self._annotations[gid].members)
            else:
                if ref not in self._records:
                    raise NotFoundError(str(ref))
                uids = [ref]

            by_clip: dict[tuple[str, float], dict[int, list[OverlayBox]]] = {}
            for uid in uids:
                record = self._records[uid]
                gid = self._assignment.get(uid)
                color = identity_color(gid if gid is not None else uid)
                frames = by_clip.setdefault((record.clip_uri, record.fps), {})
                for frame, x1, y1, x2, y2 in record.boxes:
                    t = frame / record.fps
                    if from_s is not None and t < from_s:
                        continue
                    if to_s is not None and t > to_s:
                        continue
                    frames.setdefault(frame, []).append(
                        OverlayBox(
                            frame=frame,
                            x1=x1,
                            y1=y1,
                            x2=x2,
                            y2=y2,
                            global_id=gid,
                            color=color,
                            trajectory_uid=uid,
                        )
                    )

            payloads = []
            for (clip_uri, fps), frames in sorted(by_clip.items()):
                payloads.append(
                    OverlayPayload(
                        clip_uri=clip_uri,
                        fps=fps,
                        frames=tuple(
                            (frame, tuple(frames[frame])) for frame in sorted(frames)
                        ),
                    )
                )
            return payloads

    # ---------------------------------------------------------------- storage

    def measure_storage(self, bitrate_bps: float = 2_000_000.0) -> StorageReport:
        """Compare annotation bytes against rendering-based baselines.

        The primary baseline is raw RGB frames for every annotated frame;
        the secondary assumes re-encoding the annotated spans at a fixed
        bitrate. Cameras without annotated frames contribute nothing.
        """
        with self._lock:
            if not self._records:
                raise ValueError("measure_storage requires a non-empty store")

            annotation_bytes = 0
            for record in self._records.values():
                annotation_bytes += len(
                    json.dumps(record.to_json_dict(), sort_keys=True).encode()
                )
            for rec in self._annotations.values():
                annotation_bytes += len(
                    json.dumps(rec.to_json_dict(), sort_keys=True).encode()
                )

            naive = 0
            bitrate = 0.0
            frames_by_camera: dict[str, set[int]] = {}
            for record in self._records.values():
                frames = frames_by_camera.setdefault(record.camera_id, set())
                frames.update(b[0] for b in record.boxes)
            for camera_id, frames in frames_by_camera.items():
                if not frames:
                    continue
                meta = self._cameras.get(camera_id)
                if meta is None:
                    raise NotFoundError(
                        f"camera {camera_id!r} has annotations but no registered meta"
                    )
                naive += len(frames) * meta.width * meta.height * 3
                bitrate += len(frames) / meta.fps * bitrate_bps / 8.0

            return StorageReport(
                annotation_bytes=annotation_bytes,
                naive_render_bytes=naive,
                ratio=annotation_bytes / naive if naive else 0.0,
                bitrate_baseline_bytes=int(bitrate),
                bitrate_ratio=annotation_bytes / bitrate if bitrate else 0.0,
            )

    # ------------------------------------------------------------ persistence

    def save_snapshot(self, directory: Path | str) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with self._lock:
            doc = {
                "seq": self._seq,
                "next_gid": self._next_gid,
                "cameras": [
                    {
                        "camera_id": m.camera_id,
                        "clip_uri": m.clip_uri,
                        "frame_count": m.frame_count,
                        "width": m.width,
                        "height": m.height,
                        "fps": m.fps,
                    }
                    for m in self.cameras()
                ],
                "records": [r.to_json_dict() for r in self.trajectories()],
                "annotations": [r.to_json_dict() for r in self.annotations()],
            }
        path = directory / SNAPSHOT_NAME
        path.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(
        cls,
        directory: Path | str,
        clock: Callable[[], float] | None = None,
        snapshot_every: int = 0,
    ) -> "AnnotationStore":
        """Restore from snapshot (if any) plus event-log replay."""
        directory = Path(directory)
        store = cls(
            log_path=directory / EVENT_LOG_NAME,
            clock=clock,
            snapshot_every=snapshot_every,
        )
        snapshot = directory / SNAPSHOT_NAME
        snapshot_seq = 0
        if snapshot.exists():
            doc = json.loads(snapshot.read_text(encoding="utf-8"))
            snapshot_seq = int(doc.get("seq", 0))
            for m in doc.get("cameras", []):
                store._cameras[m["camera_id"]] = CameraVideoMeta(
                    camera_id=m["camera_id"],
                    clip_uri=m["clip_uri"],
                    frame_count=int(m["frame_count"]),
                    width=int(m["width"]),
                    height=int(m["height"]),
                    fps=float(m["fps"]),
                )
            for r in doc.get("records", []):
                record = TrajectoryRecord.from_json_dict(r)
                store._records[record.uid] = record
            for a in doc.get("annotations", []):
                record = AnnotationRecord(
                    global_id=int(a["global_id"]),
                    members=set(a["members"]),
                    version=int(a["version"]),
                    history=[tuple(h) for h in a["history"]],
                )
                store._annotations[record.global_id] = record
                for uid in record.members:
                    store._assignment[uid] = record.global_id
            store._next_gid = int(doc.get("next_gid", 1))
            store._seq = snapshot_seq

        log = directory / EVENT_LOG_NAME
        if log.exists():
            events = [
                json.loads(line)
                for line in log.read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
            # Replay only events past the snapshot, without re-logging them.
            replay_path, store._log_path = store._log_path, None
            try:
                for event in events:
                    if int(event["seq"]) <= snapshot_seq:
                        continue
                    store._apply_event(event)
                    store._seq = int(event["seq"])
            finally:
                store._log_path = replay_path
        return store

    def _apply_event(self, event: dict) -> None:
        op = event["op"]
        payload = event["payload"]
        user = event.get("user", "system")
        if op == "register_camera":
            self.register_camera(
                CameraVideoMeta(
                    camera_id=payload["camera_id"],
                    clip_uri=payload["clip_uri"],
                    frame_count=int(payload["frame_count"]),
                    width=int(payload["width"]),
                    height=int(payload["height"]),
                    fps=float(payload["fps"]),
                ),
                user=user,
            )
        elif op == "register_trajectory":
            self.register_trajectory(TrajectoryRecord.from_json_dict(payload), user=user)
        elif op == "match":
            self.submit_match(payload["query"], payload["candidate"], user=user)
        elif op == "unmatch":
            self.unmatch(payload["trajectory"], user=user)
        elif op == "create_identity":
            self.create_identity(payload["members"], user=user)
        else:
            raise ValueError(f"unknown event op {op!r}")


class SerializedWriter:
    """Single ordered write queue in front of a store.

    All mutations submitted here execute on one worker thread in FIFO
    order, which makes every accepted write linearizable by construction.
    """

    def __init__(self, store: AnnotationStore) -> None:
        self.store = store
        self._queue: "queue.Queue[tuple[Callable, Future] | None]" = queue.Queue()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def _run(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            fn, future = item
            try:
                future.set_result(fn(self.store))
            except BaseException as exc:  # surfaced to the submitter
                future.set_exception(exc)

    def submit(self, fn: Callable[[AnnotationStore], object]) -> Future:
        future: Future = Future()
        self._queue.put((fn, future))
        return future

    def submit_match(self, *args, **kwargs) -> AnnotationRecord:
        return self.submit(lambda s: s.submit_match(*args, **kwargs)).result()

    def unmatch(self, *args, **kwargs) -> AnnotationRecord | None:
        return self.submit(lambda s: s.unmatch(*args, **kwargs)).result()

    def close(self) -> None:
        self._queue.put(None)
        self._thread.join(timeout=5)


# ------------------------------------------------------------------- export

EXPORT_CSV_HEADER = "frame,id,x,y,w,h,conf,c1,c2,c3"
EXPORT_INDEX_NAME = "global_index.json"


def export_dataset(
    store: AnnotationStore, out_dir: Path | str, fmt: str = "mtmc"
) -> list[Path]:
    """Write per-camera ground-truth CSVs plus the global identity index.

    Only trajectories assigned to a global identity appear in the CSVs;
    unannotated trajectories are not yet ground truth.
    """
    if fmt != "mtmc":
        raise ValueError(f"unknown export format {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    rows_by_camera: dict[str, list[tuple[int, int, float, float, float, float]]] = {
        meta.camera_id: [] for meta in store.cameras()
    }
    index: dict[str, list[dict]] = {}
    for annotation in store.annotations():
        members = []
        for uid in sorted(annotation.members):
            record = store.trajectory(uid)
            members.append(record.to_json_dict())
            rows = rows_by_camera.setdefault(record.camera_id, [])
            for frame, x1, y1, x2, y2 in record.boxes:
                rows.append(
                    (frame, annotation.global_id, x1, y1, x2 - x1, y2 - y1)
                )
        index[str(annotation.global_id)] = members

    for camera_id, rows in sorted(rows_by_camera.items()):
        rows.sort(key=lambda r: (r[0], r[1]))
        lines = [EXPORT_CSV_HEADER]
        for frame, gid, x, y, w, h in rows:
            lines.append(f"{frame},{gid},{x},{y},{w},{h},1,-1,-1,-1")
        path = out_dir / f"{camera_id}.csv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)

    index_path = out_dir / EXPORT_INDEX_NAME
    index_path.write_text(json.dumps(index, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    written.append(index_path)
    return written


def import_dataset(
    in_dir: Path | str,
    cameras: Iterable[CameraVideoMeta] = (),
    log_path: Path | str | None = None,
) -> AnnotationStore:
    """Rebuild a store from an export; inverse of export_dataset at the
    partition level."""
    in_dir = Path(in_dir)
    index = json.loads((in_dir / EXPORT_INDEX_NAME).read_text(encoding="utf-8"))
    store = AnnotationStore(log_path=log_path)
    for meta in cameras:
        store.register_camera(meta)
    for gid_str in sorted(index, key=int):
        members = [TrajectoryRecord.from_json_dict(doc) for doc in index[gid_str]]
        for record in members:
            store.register_trajectory(record, user="import")
        store.create_identity([record.uid for record in members], user="import")
    return store


def partition_equal(a: AnnotationStore, b: AnnotationStore) -> bool:
    return a.partition() == b.partition()


__all__ = [
    "AnnotationRecord",
    "AnnotationStore",
    "EXPORT_CSV_HEADER",
    "EXPORT_INDEX_NAME",
    "NotFoundError",
    "OverlayBox",
    "OverlayPayload",
    "SerializedWriter",
    "StorageReport",
    "TrajectoryRecord",
    "VersionConflictError",
    "export_dataset",
    "identity_color",
    "import_dataset",
    "partition_equal",
]
