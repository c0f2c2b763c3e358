import json

from mtmc_annotator.cli import main


def test_generate_pipeline_evaluate_export_flow(tmp_path, capsys):
    data = tmp_path / "data"
    store = tmp_path / "store"
    out = tmp_path / "export"

    assert main([
        "generate", "--out", str(data),
        "--seed", "7", "--vehicles", "4", "--cameras", "2", "--frames", "400",
    ]) == 0
    assert (data / "graph.json").exists()
    assert (data / "detections" / "c000.csv").exists()

    assert main([
        "pipeline", "--data", str(data), "--store", str(store), "--interval", "1",
    ]) == 0
    assert (store / "events.jsonl").exists()
    assert (store / "work" / "trajectories" / "c000.jsonl").exists()

    assert main([
        "evaluate", "--data", str(data),
        "--pred", str(store / "work" / "trajectories"),
        "--out-csv", str(tmp_path / "report.csv"),
        "--out-json", str(tmp_path / "report.json"),
    ]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["totals"]["precision"] == 1.0
    assert report["totals"]["recall"] == 1.0

    assert main(["export", "--store", str(store), "--out", str(out)]) == 0
    assert (out / "global_index.json").exists()
    assert (out / "c000.csv").exists()

    output = capsys.readouterr().out
    assert "pipeline done" in output
    assert "overall: precision=100.00%" in output


def test_sweep_command(tmp_path, capsys):
    data = tmp_path / "data"
    main([
        "generate", "--out", str(data),
        "--seed", "3", "--vehicles", "3", "--cameras", "2", "--frames", "400",
        "--dropout", "0.05",
    ])
    csv_path = tmp_path / "sweep.csv"
    assert main([
        "sweep", "--data", str(data), "--intervals", "1,5", "--out", str(csv_path),
    ]) == 0
    lines = csv_path.read_text().strip().splitlines()
    assert len(lines) == 3
    out = capsys.readouterr().out
    assert "interval" in out


def test_generate_with_config_file(tmp_path):
    cfg = {
        "seed": 11, "n_vehicles": 3, "n_cameras": 2, "frames_per_camera": 400,
        "topology": "line", "overlap_seconds": 1.5,
        "travel_time_min_s": 3.0, "travel_time_max_s": 8.0,
        "dwell_min_s": 5.0, "dwell_max_s": 7.0,
        "box_jitter_px": 0.0, "feature_noise": 0.0, "dropout_prob": 0.0,
        "false_positive_rate": 0.0, "overlap_entry_fraction": 1.0,
        "fps": 10.0, "width": 1280, "height": 960, "feature_dim": 16,
    }
    cfg_path = tmp_path / "scenario.json"
    cfg_path.write_text(json.dumps(cfg))
    assert main(["generate", "--out", str(tmp_path / "d"), "--config", str(cfg_path)]) == 0
    stored = json.loads((tmp_path / "d" / "scenario.json").read_text())
    assert stored["seed"] == 11
    assert stored["feature_dim"] == 16
