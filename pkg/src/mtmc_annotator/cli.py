"""Command-line entry points: scenario generation, tracking pipeline,
interval sweeps, evaluation, dataset export and the annotation service."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .annotate import AnnotationStore, export_dataset
from .evaluate import evaluate_cameras, write_report_csv, write_report_json
from .ingest import SamplingConfig
from .scenario import (
    ScenarioConfig,
    generate,
    load_scenario_dir,
    sweep_intervals,
    write_sweep_csv,
)
from .service.broker import InProcessBroker
from .service.jobs import run_full_pipeline
from .tracker import AssociationConfig, read_trajectories


def _cmd_generate(args: argparse.Namespace) -> int:
    if args.config:
        doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        cfg = ScenarioConfig.from_json_dict(doc)
    else:
        cfg = ScenarioConfig(
            seed=args.seed,
            n_vehicles=args.vehicles,
            n_cameras=args.cameras,
            frames_per_camera=args.frames,
            box_jitter_px=args.box_jitter,
            feature_noise=args.feature_noise,
            dropout_prob=args.dropout,
            false_positive_rate=args.fp_rate,
        )
    scenario = generate(cfg)
    out = scenario.write(args.out)
    n_trajs = sum(len(v) for v in scenario.ground_truth.trajectories.values())
    print(f"wrote scenario with {cfg.n_vehicles} vehicles, "
          f"{cfg.n_cameras} cameras, {n_trajs} gt trajectories to {out}")
    return 0


def _cmd_pipeline(args: argparse.Namespace) -> int:
    store = AnnotationStore(log_path=Path(args.store) / "events.jsonl")
    broker = InProcessBroker(duplicate_deliveries=args.duplicate_deliveries)
    runner = run_full_pipeline(
        data_dir=args.data,
        work_dir=args.work or str(Path(args.store) / "work"),
        store=store,
        sampling=SamplingConfig(
            interval=args.interval, confidence_threshold=args.confidence
        ),
        assoc=AssociationConfig(),
        broker=broker,
    )
    store.save_snapshot(args.store)
    n = len(store.trajectories())
    dead = len(broker.dead_letters)
    print(f"pipeline done: {n} trajectories registered across "
          f"{len(store.cameras())} cameras ({dead} dead-lettered jobs)")
    print(f"trajectories: {runner.work_dir / 'trajectories'}")
    return 0 if dead == 0 else 1


def _cmd_sweep(args: argparse.Namespace) -> int:
    doc = json.loads((Path(args.data) / "scenario.json").read_text(encoding="utf-8"))
    cfg = ScenarioConfig.from_json_dict(doc)
    intervals = [int(v) for v in args.intervals.split(",")]
    rows = sweep_intervals(cfg, intervals)
    write_sweep_csv(args.out, rows)
    print(f"{'interval':>8} {'time (s)':>10} {'recall %':>9} {'precision %':>12}")
    for row in rows:
        print(f"{row.interval:>8} {row.wall_time_s:>10.3f} "
              f"{100 * row.recall:>9.2f} {100 * row.precision:>12.2f}")
    print(f"wrote {args.out}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    data = load_scenario_dir(args.data)
    preds = {}
    for cam_id in data.metas:
        path = Path(args.pred) / f"{cam_id}.jsonl"
        preds[cam_id] = read_trajectories(path) if path.exists() else []
    report = evaluate_cameras(preds, data.gt_trajectories, scene=args.scene)
    if args.out_csv:
        write_report_csv(args.out_csv, report)
    if args.out_json:
        write_report_json(args.out_json, report)
    for cam in report.cameras:
        print(f"{cam.scene}/{cam.camera_id}: algo={cam.n_pred} gt={cam.n_gt} "
              f"precision={100 * cam.precision:.2f}% recall={100 * cam.recall:.2f}%")
    print(f"overall: precision={100 * report.precision:.2f}% "
          f"recall={100 * report.recall:.2f}%")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import build_state, create_app
    from .service.config import load_service_config

    config = load_service_config(args.config)
    if args.data:
        config = type(config)(**{**config.__dict__, "data_dir": args.data})
    if args.store:
        config = type(config)(**{**config.__dict__, "store_dir": args.store})
    if args.port:
        config = type(config)(**{**config.__dict__, "port": args.port})
    state = build_state(config)
    app = create_app(state)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    store = AnnotationStore.load(args.store)
    files = export_dataset(store, args.out)
    print(f"exported {len(files)} files to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtmc-annotator",
        description="Multi-camera tracking annotation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic scenario directory")
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="scenario config JSON (overrides flags)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vehicles", type=int, default=10)
    p.add_argument("--cameras", type=int, default=3)
    p.add_argument("--frames", type=int, default=600)
    p.add_argument("--box-jitter", type=float, default=0.0)
    p.add_argument("--feature-noise", type=float, default=0.0)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--fp-rate", type=float, default=0.0)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("pipeline", help="run ingest/track/feature/index jobs")
    p.add_argument("--data", required=True, help="scenario directory")
    p.add_argument("--store", required=True, help="annotation store directory")
    p.add_argument("--work", help="work directory (default: <store>/work)")
    p.add_argument("--interval", type=int, default=1)
    p.add_argument("--confidence", type=float, default=0.1)
    p.add_argument("--duplicate-deliveries", action="store_true",
                   help="deliver every job message twice (idempotency check)")
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("sweep", help="interval sweep: runtime/recall trade-off")
    p.add_argument("--data", required=True, help="scenario directory")
    p.add_argument("--intervals", default="1,2,5,10")
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("evaluate", help="score tracked trajectories against gt")
    p.add_argument("--data", required=True, help="scenario directory")
    p.add_argument("--pred", required=True, help="directory of <camera>.jsonl files")
    p.add_argument("--scene", default="S00")
    p.add_argument("--out-csv")
    p.add_argument("--out-json")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--config", help="service config JSON/TOML")
    p.add_argument("--data", help="override data_dir")
    p.add_argument("--store", help="override store_dir")
    p.add_argument("--port", type=int)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("export", help="export the annotated dataset")
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
