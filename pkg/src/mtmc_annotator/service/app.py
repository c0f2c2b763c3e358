"""HTTP API for the annotation workbench.

Read endpoints are side-effect-free; every write funnels through one
SerializedWriter queue, so concurrent clients reconcile purely through
version tokens: a stale expected_version earns a 409 with the current
version and changes nothing.
"""

from __future__ import annotations

import io
import tempfile
import threading
import time
import zipfile
from pathlib import Path

from fastapi import FastAPI, Header, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..annotate import (
    AnnotationRecord,
    AnnotationStore,
    NotFoundError,
    SerializedWriter,
    TrajectoryRecord,
    VersionConflictError,
    export_dataset,
)
from ..recommend import CameraGraph, TimeWindow, rank, time_constrained_gallery, topology_prune
from .broker import JobMessage, make_broker
from .config import ServiceConfig
from .jobs import PipelineRunner


class WindowBody(BaseModel):
    min: float = 0.0
    max: float = 60.0


class RecommendRequest(BaseModel):
    trajectory_id: str
    window: WindowBody = Field(default_factory=WindowBody)
    mode: str = "blend"
    hops: int = 1
    include_pruned: bool = False


class MatchRequest(BaseModel):
    query_id: str
    candidate_id: str
    expected_version: int | None = None


class UnmatchRequest(BaseModel):
    expected_version: int | None = None


class JobRequest(BaseModel):
    kind: str
    camera_id: str


class AppState:
    """Everything the endpoints need, wired once at startup."""

    def __init__(
        self,
        store: AnnotationStore,
        graph: CameraGraph,
        config: ServiceConfig,
        runner: PipelineRunner | None = None,
    ) -> None:
        self.store = store
        self.graph = graph
        self.config = config
        self.runner = runner
        self.writer = SerializedWriter(store)
        self._worker: threading.Thread | None = None
        self._stop = threading.Event()

    def start_worker(self) -> None:
        """Background drain of the job queue (one worker, FIFO)."""
        if self.runner is None or self._worker is not None:
            return

        def loop() -> None:
            while not self._stop.is_set():
                delivery = self.runner.broker.poll()
                if delivery is None:
                    time.sleep(0.02)
                    continue
                self.runner.process_one(delivery)

        self._worker = threading.Thread(target=loop, daemon=True)
        self._worker.start()

    def shutdown(self) -> None:
        self._stop.set()
        self.writer.close()


def build_state(config: ServiceConfig) -> AppState:
    from ..recommend import load_camera_graph

    store = AnnotationStore.load(
        Path(config.store_dir), snapshot_every=config.snapshot_every
    )
    graph = load_camera_graph(Path(config.data_dir) / "graph.json")
    runner = PipelineRunner(
        data_dir=config.data_dir,
        work_dir=config.work_dir,
        store=store,
        sampling=_sampling_from_config(config),
        broker=make_broker(config.broker_uri),
    )
    return AppState(store=store, graph=graph, config=config, runner=runner)


def _sampling_from_config(config: ServiceConfig):
    from ..ingest import SamplingConfig

    return SamplingConfig(
        interval=config.sampling_interval,
        confidence_threshold=config.confidence_threshold,
    )


def _trajectory_summary(store: AnnotationStore, record: TrajectoryRecord) -> dict:
    gid = store.assignment_of(record.uid)
    return {
        "uid": record.uid,
        "trajectory_id": record.trajectory_id,
        "camera_id": record.camera_id,
        "clip_uri": record.clip_uri,
        "st": record.t_s,
        "et": record.t_e,
        "fps": record.fps,
        "n_frames": len(record.boxes),
        "global_id": gid,
        "version": store.current_version(record.uid),
    }


def _annotation_json(record: AnnotationRecord) -> dict:
    return {
        "global_id": record.global_id,
        "members": sorted(record.members),
        "version": record.version,
    }


def create_app(state: AppState, start_worker: bool = True) -> FastAPI:
    app = FastAPI(title="mtmc-annotator", version="0.1.0")
    app.state.ctx = state
    if start_worker:
        state.start_worker()

    store = state.store

    @app.exception_handler(NotFoundError)
    async def not_found(_: Request, exc: NotFoundError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(VersionConflictError)
    async def conflict(_: Request, exc: VersionConflictError):
        return JSONResponse(
            status_code=409,
            content={"detail": str(exc), "current_version": exc.current},
        )

    @app.exception_handler(ValueError)
    async def invalid(_: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/cameras")
    def cameras() -> list[dict]:
        return [
            {
                "camera_id": m.camera_id,
                "clip_uri": m.clip_uri,
                "frame_count": m.frame_count,
                "width": m.width,
                "height": m.height,
                "fps": m.fps,
                "position": list(state.graph.cameras[m.camera_id].position)
                if m.camera_id in state.graph.cameras
                else None,
                "zone_id": state.graph.cameras[m.camera_id].zone_id
                if m.camera_id in state.graph.cameras
                else None,
            }
            for m in store.cameras()
        ]

    @app.get("/cameras/{camera_id}/trajectories")
    def camera_trajectories(camera_id: str) -> list[dict]:
        store.camera(camera_id)  # 404 on unknown camera
        return [
            _trajectory_summary(store, record)
            for record in store.trajectories(camera_id)
        ]

    @app.get("/trajectories/{uid}")
    def trajectory(uid: str) -> dict:
        record = store.trajectory(uid)
        doc = _trajectory_summary(store, record)
        doc["boxes"] = [list(b) for b in record.boxes]
        doc["feature"] = list(record.feature)
        doc["orientation"] = list(record.orientation)
        return doc

    @app.post("/recommend")
    def recommend(body: RecommendRequest) -> dict:
        record = store.trajectory(body.trajectory_id)
        query = record.to_trajectory()
        window = TimeWindow(min_offset=body.window.min, max_offset=body.window.max)
        galleries = store.galleries()
        gallery_cams = sorted(c for c in state.graph.cameras if c != record.camera_id)

        candidates = time_constrained_gallery(query, state.graph, gallery_cams, galleries, window)
        if not body.include_pruned:
            candidates = topology_prune(candidates, query, state.graph, hops=body.hops)

        query_gid = store.assignment_of(record.uid)
        if query_gid is not None:
            candidates = [
                c for c in candidates if store.assignment_of(c.uid) != query_gid
            ]

        ranked = rank(
            candidates,
            query,
            mode=body.mode,
            alpha=state.config.recommend_alpha,
            max_abs_offset=max(abs(body.window.min), abs(body.window.max)) or None,
        )
        return {
            "query": _trajectory_summary(store, record),
            "candidates": [
                {
                    **_trajectory_summary(store, store.trajectory(c.uid)),
                    "d": c.time_offset,
                    "appearance_distance": c.appearance_distance,
                }
                for c in ranked
            ],
        }

    @app.post("/matches")
    def post_match(
        body: MatchRequest, x_user: str = Header(default="anonymous")
    ) -> dict:
        record = state.writer.submit_match(
            body.query_id,
            body.candidate_id,
            user=x_user,
            expected_version=body.expected_version,
        )
        return _annotation_json(record)

    @app.delete("/matches/{uid}")
    def delete_match(
        uid: str,
        body: UnmatchRequest | None = None,
        x_user: str = Header(default="anonymous"),
    ) -> dict:
        expected = body.expected_version if body is not None else None
        record = state.writer.unmatch(uid, user=x_user, expected_version=expected)
        if record is None:
            return {"deleted": True}
        return _annotation_json(record)

    @app.get("/annotations")
    def annotations() -> list[dict]:
        return [_annotation_json(r) for r in store.annotations()]

    @app.get("/overlay/{ref}")
    def overlay(
        ref: str,
        from_s: float | None = Query(default=None, alias="from"),
        to_s: float | None = Query(default=None, alias="to"),
    ) -> dict:
        payloads = store.build_overlay(ref, from_s=from_s, to_s=to_s)
        return {"payloads": [p.to_json_dict() for p in payloads]}

    @app.get("/export")
    def export(format: str = "mtmc") -> Response:
        buf = io.BytesIO()
        with tempfile.TemporaryDirectory() as tmp:
            files = export_dataset(store, tmp, fmt=format)
            with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as zf:
                for path in files:
                    zf.write(path, arcname=Path(path).name)
        return Response(
            content=buf.getvalue(),
            media_type="application/zip",
            headers={"Content-Disposition": "attachment; filename=mtmc_export.zip"},
        )

    @app.post("/jobs")
    def post_job(body: JobRequest) -> dict:
        if state.runner is None:
            return JSONResponse(status_code=422, content={"detail": "no pipeline configured"})
        JobMessage(job_id="validate", kind=body.kind, camera_id=body.camera_id)
        job_id = state.runner.enqueue(body.kind, body.camera_id)
        return {"job_id": job_id, "state": "queued"}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str) -> dict:
        if state.runner is None:
            raise NotFoundError(job_id)
        info = state.runner.job_info(job_id)
        if info is None:
            raise NotFoundError(job_id)
        return {"job_id": info.job_id, "state": info.state, "attempts": info.attempts}

    return app


__all__ = ["AppState", "build_state", "create_app"]
