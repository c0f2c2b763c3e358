"""Job pipeline: ingest -> track -> feature -> index, chained per camera.

Workers are idempotent keyed on job_id: a result marker file is the commit
point, so redelivered messages skip the work, re-publish their follow-ups
(which are themselves idempotent) and acknowledge. Combined with
at-least-once delivery this leaves exactly one persisted result per job no
matter how often a message arrives.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path

from ..annotate import AnnotationStore, TrajectoryRecord
from ..ingest import (
    CameraVideoMeta,
    SamplingConfig,
    load_camera_meta,
    parse_detections,
    sample_and_filter,
    write_detections,
)
from ..tracker import (
    AssociationConfig,
    read_trajectories,
    track_camera,
    write_trajectories,
)
from .broker import Broker, Delivery, InProcessBroker, JobMessage

PIPELINE_ORDER = ("ingest", "track", "feature", "index")


@dataclass
class JobInfo:
    job_id: str
    state: str  # queued | running | done | dead
    attempts: int


class PipelineRunner:
    """Drives pipeline jobs against a broker and persists results.

    data_dir is a scenario-layout directory (cameras/, detections/);
    work_dir collects intermediate artifacts plus the result markers.
    """

    def __init__(
        self,
        data_dir: Path | str,
        work_dir: Path | str,
        store: AnnotationStore,
        sampling: SamplingConfig | None = None,
        assoc: AssociationConfig | None = None,
        broker: Broker | None = None,
    ) -> None:
        self.data_dir = Path(data_dir)
        self.work_dir = Path(work_dir)
        self.store = store
        self.sampling = sampling or SamplingConfig()
        self.assoc = assoc or AssociationConfig()
        self.broker = broker or InProcessBroker()
        self._jobs: dict[str, JobInfo] = {}
        self._lock = threading.Lock()
        for sub in ("results", "sampled", "trajectories", "gallery"):
            (self.work_dir / sub).mkdir(parents=True, exist_ok=True)

    # ----------------------------------------------------------------- queue

    @staticmethod
    def job_id_for(kind: str, camera_id: str) -> str:
        # Deterministic ids make chained re-publication idempotent too.
        return f"{kind}:{camera_id}"

    def enqueue(self, kind: str, camera_id: str) -> str:
        message = JobMessage(
            job_id=self.job_id_for(kind, camera_id), kind=kind, camera_id=camera_id
        )
        with self._lock:
            info = self._jobs.get(message.job_id)
            if info is None or info.state == "dead":
                self._jobs[message.job_id] = JobInfo(message.job_id, "queued", 0)
        self.broker.publish(message)
        return message.job_id

    def enqueue_all(self) -> list[str]:
        """One ingest job per camera found in the data directory."""
        return [self.enqueue("ingest", cam) for cam in self.camera_ids()]

    def camera_ids(self) -> list[str]:
        return sorted(
            p.name.removesuffix(".meta.json")
            for p in (self.data_dir / "cameras").glob("*.meta.json")
        )

    def job_info(self, job_id: str) -> JobInfo | None:
        with self._lock:
            info = self._jobs.get(job_id)
            return JobInfo(info.job_id, info.state, info.attempts) if info else None

    def _set_state(self, job_id: str, state: str, attempts: int) -> None:
        with self._lock:
            self._jobs[job_id] = JobInfo(job_id, state, attempts)

    # -------------------------------------------------------------- handlers

    def _meta(self, camera_id: str) -> CameraVideoMeta:
        return load_camera_meta(self.data_dir / "cameras" / f"{camera_id}.meta.json")

    def _marker_path(self, job_id: str) -> Path:
        return self.work_dir / "results" / f"{job_id.replace(':', '_')}.json"

    def execute(self, message: JobMessage) -> list[JobMessage]:
        """Run one job's work (or skip it if already persisted) and return
        the follow-up messages to publish."""
        marker = self._marker_path(message.job_id)
        if not marker.exists():
            outputs = self._run_stage(message)
            relative = sorted(
                str(Path(p).relative_to(self.work_dir)) for p in outputs
            )
            marker.write_text(
                json.dumps({"job_id": message.job_id, "outputs": relative}, sort_keys=True)
                + "\n",
                encoding="utf-8",
            )
        return self._follow_ups(message)

    def _follow_ups(self, message: JobMessage) -> list[JobMessage]:
        idx = PIPELINE_ORDER.index(message.kind)
        if idx + 1 == len(PIPELINE_ORDER):
            return []
        kind = PIPELINE_ORDER[idx + 1]
        return [
            JobMessage(
                job_id=self.job_id_for(kind, message.camera_id),
                kind=kind,
                camera_id=message.camera_id,
            )
        ]

    def _run_stage(self, message: JobMessage) -> list[str]:
        cam = message.camera_id
        meta = self._meta(cam)
        if message.kind == "ingest":
            dets = parse_detections(self.data_dir / "detections" / f"{cam}.csv", meta)
            sampled = sample_and_filter(dets, self.sampling)
            out = self.work_dir / "sampled" / f"{cam}.csv"
            dim = len(sampled[0].feature) if sampled else len(dets[0].feature) if dets else 0
            write_detections(out, sampled, feature_dim=dim)
            return [str(out)]
        if message.kind == "track":
            dets = parse_detections(self.work_dir / "sampled" / f"{cam}.csv", meta)
            trajs = track_camera(dets, meta, self.sampling, self.assoc)
            out = self.work_dir / "trajectories" / f"{cam}.jsonl"
            write_trajectories(out, trajs)
            return [str(out)]
        if message.kind == "feature":
            trajs = read_trajectories(self.work_dir / "trajectories" / f"{cam}.jsonl")
            doc = {
                "camera_id": cam,
                "trajectories": [
                    {
                        "trajectory_id": t.trajectory_id,
                        "st": t.st,
                        "et": t.et,
                        "feature": [float(v) for v in t.feature],
                        "orientation": [float(v) for v in t.orientation],
                    }
                    for t in trajs
                ],
            }
            out = self.work_dir / "gallery" / f"{cam}.json"
            out.write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")
            return [str(out)]
        if message.kind == "index":
            trajs = read_trajectories(self.work_dir / "trajectories" / f"{cam}.jsonl")
            self.store.register_camera(meta)
            for traj in trajs:
                self.store.register_trajectory(
                    TrajectoryRecord.from_trajectory(traj, meta.clip_uri, meta.fps)
                )
            return []
        raise ValueError(f"unhandled job kind {message.kind!r}")

    # ------------------------------------------------------------------ loop

    def process_one(self, delivery: Delivery) -> bool:
        """Process one delivery; returns True when the job completed."""
        message = delivery.message
        self._set_state(message.job_id, "running", message.attempt)
        try:
            follow_ups = self.execute(message)
        except Exception:
            self.broker.nack(delivery)
            failed_attempts = message.attempt + 1
            max_attempts = getattr(self.broker, "max_attempts", 3)
            state = "dead" if failed_attempts >= max_attempts else "queued"
            self._set_state(message.job_id, state, failed_attempts)
            return False
        for follow_up in follow_ups:
            with self._lock:
                info = self._jobs.get(follow_up.job_id)
                if info is None or info.state not in ("done", "running"):
                    self._jobs[follow_up.job_id] = JobInfo(follow_up.job_id, "queued", 0)
            self.broker.publish(follow_up)
        self.broker.ack(delivery)
        self._set_state(message.job_id, "done", message.attempt)
        return True

    def run_until_idle(self, max_steps: int = 100_000) -> int:
        """Single-worker drain loop; returns the number of deliveries seen.

        process_one publishes follow-ups before acknowledging, so an empty
        poll with one worker means the whole chain has drained.
        """
        steps = 0
        while steps < max_steps:
            delivery = self.broker.poll()
            if delivery is None:
                break
            self.process_one(delivery)
            steps += 1
        return steps


def run_full_pipeline(
    data_dir: Path | str,
    work_dir: Path | str,
    store: AnnotationStore,
    sampling: SamplingConfig | None = None,
    assoc: AssociationConfig | None = None,
    broker: Broker | None = None,
) -> PipelineRunner:
    """Convenience wrapper: enqueue every camera and drain the queue."""
    runner = PipelineRunner(
        data_dir, work_dir, store, sampling=sampling, assoc=assoc, broker=broker
    )
    runner.enqueue_all()
    runner.run_until_idle()
    return runner


__all__ = ["JobInfo", "PIPELINE_ORDER", "PipelineRunner", "run_full_pipeline"]
