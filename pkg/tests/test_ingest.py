import numpy as np
import pytest

from mtmc_annotator.ingest import (
    BoundingBox,
    DetectionFormatError,
    FeatureDimensionError,
    FrameRangeError,
    SamplingConfig,
    parse_detections,
    read_features,
    sample_and_filter,
    write_detections,
    write_features,
)

from conftest import make_box, make_detection, make_meta


class TestBoundingBox:
    def test_rejects_inverted(self):
        with pytest.raises(ValueError):
            BoundingBox(10, 0, 0, 10)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            BoundingBox(0, 0, float("nan"), 10)

    def test_iou_self_is_one(self):
        box = make_box(5, 5, 25, 30)
        assert box.iou(box) == 1.0

    def test_iou_disjoint_is_zero(self):
        assert make_box(0, 0, 10, 10).iou(make_box(20, 20, 30, 30)) == 0.0

    def test_iou_half_overlap(self):
        # 10x10 boxes shifted by 5 horizontally: inter 50, union 150.
        a = make_box(0, 0, 10, 10)
        b = make_box(5, 0, 15, 10)
        assert a.iou(b) == pytest.approx(50 / 150)

    def test_clamped(self):
        box = BoundingBox(-5, -5, 2000, 500).clamped(1280, 960)
        assert (box.x1, box.y1, box.x2, box.y2) == (0, 0, 1280, 500)


class TestParseDetections:
    def _write(self, tmp_path, rows, dim=4, n_features=None):
        path = tmp_path / "c000.csv"
        lines = ["frame,id,x,y,w,h,conf"] + rows
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        n = len(rows) if n_features is None else n_features
        write_features(path.with_suffix(".ftr"), np.zeros((n, dim), dtype=np.float32))
        return path

    def test_empty_file_with_header(self, tmp_path):
        path = self._write(tmp_path, [])
        assert parse_detections(path, make_meta()) == []

    def test_single_row_xywh_to_corners(self, tmp_path):
        path = self._write(tmp_path, ["0,-1,10,20,30,40,0.9"])
        (det,) = parse_detections(path, make_meta())
        assert (det.box.x1, det.box.y1, det.box.x2, det.box.y2) == (10, 20, 40, 60)
        assert det.frame == 0
        assert det.confidence == 0.9
        assert det.detection_id == 0  # -1 rows take the row index

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "c000.csv"
        path.write_text("x,y,z\n", encoding="utf-8")
        write_features(path.with_suffix(".ftr"), np.zeros((0, 4), dtype=np.float32))
        with pytest.raises(DetectionFormatError):
            parse_detections(path, make_meta())

    def test_malformed_row_aborts(self, tmp_path):
        path = self._write(tmp_path, ["0,-1,10,20,oops,40,0.9"])
        with pytest.raises(DetectionFormatError):
            parse_detections(path, make_meta())

    def test_frame_beyond_clip_rejected(self, tmp_path):
        path = self._write(tmp_path, ["999,-1,10,20,30,40,0.9"])
        with pytest.raises(FrameRangeError):
            parse_detections(path, make_meta(frame_count=100))

    def test_feature_row_count_mismatch(self, tmp_path):
        path = self._write(tmp_path, ["0,-1,10,20,30,40,0.9"], n_features=3)
        with pytest.raises(DetectionFormatError):
            parse_detections(path, make_meta())

    def test_truncated_feature_file_names_row(self, tmp_path):
        path = self._write(tmp_path, ["0,-1,10,20,30,40,0.9"])
        ftr = path.with_suffix(".ftr")
        raw = ftr.read_bytes()
        ftr.write_bytes(raw[:-4])  # chop one float
        with pytest.raises(FeatureDimensionError, match="row"):
            parse_detections(path, make_meta())

    def test_boxes_clamped_to_image(self, tmp_path):
        path = self._write(tmp_path, ["0,-1,1200,900,200,200,0.5"])
        (det,) = parse_detections(path, make_meta(width=1280, height=960))
        assert det.box.x2 == 1280
        assert det.box.y2 == 960

    def test_sorted_by_frame_then_id(self, tmp_path):
        rows = ["5,2,0,0,10,10,0.5", "1,7,0,0,10,10,0.5", "1,3,0,0,10,10,0.5"]
        path = self._write(tmp_path, rows)
        dets = parse_detections(path, make_meta())
        assert [(d.frame, d.detection_id) for d in dets] == [(1, 3), (1, 7), (5, 2)]


class TestRoundTrip:
    def test_write_parse_is_identity(self, tmp_path):
        rng = np.random.default_rng(123)
        meta = make_meta()
        dets = []
        for k in range(1000):
            x = float(rng.uniform(0, 1100))
            y = float(rng.uniform(0, 800))
            w = float(rng.uniform(5, 150))
            h = float(rng.uniform(5, 150))
            dets.append(
                make_detection(
                    frame=int(rng.integers(0, meta.frame_count)),
                    box=BoundingBox(x, y, x + w, y + h),
                    confidence=float(rng.uniform(0, 1)),
                    feature=rng.normal(size=16).astype(np.float32),
                    detection_id=k,
                )
            )
        dets.sort(key=lambda d: (d.frame, d.detection_id))
        path = tmp_path / "c000.csv"
        write_detections(path, dets)
        parsed = parse_detections(path, meta)
        assert len(parsed) == len(dets)
        for a, b in zip(dets, parsed):
            assert (a.frame, a.detection_id, a.confidence) == (b.frame, b.detection_id, b.confidence)
            assert (a.box.x1, a.box.y1, a.box.x2, a.box.y2) == (b.box.x1, b.box.y1, b.box.x2, b.box.y2)
            assert np.array_equal(a.feature, b.feature)

    def test_file_level_fixed_point(self, tmp_path):
        # parse then write reproduces the file byte for byte
        rng = np.random.default_rng(9)
        meta = make_meta()
        dets = [
            make_detection(
                frame=k % 50,
                box=make_box(k, k, k + 30, k + 40),
                confidence=float(rng.uniform(0, 1)),
                feature=rng.normal(size=8).astype(np.float32),
                detection_id=k,
            )
            for k in range(200)
        ]
        dets.sort(key=lambda d: (d.frame, d.detection_id))
        first = tmp_path / "a.csv"
        write_detections(first, dets)
        second = tmp_path / "b.csv"
        write_detections(second, parse_detections(first, meta))
        assert first.read_bytes() == second.read_bytes()
        assert first.with_suffix(".ftr").read_bytes() == second.with_suffix(".ftr").read_bytes()


class TestFeatureFile:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        feats = rng.normal(size=(17, 32)).astype(np.float32)
        path = tmp_path / "x.ftr"
        write_features(path, feats)
        assert np.array_equal(read_features(path), feats)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "x.ftr"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(DetectionFormatError):
            read_features(path)


class TestSampleAndFilter:
    def test_identity_config(self):
        dets = [make_detection(frame=f, confidence=0.5) for f in range(10)]
        cfg = SamplingConfig(interval=1, confidence_threshold=0.0)
        assert sample_and_filter(dets, cfg) == dets

    def test_stride_two(self):
        dets = [make_detection(frame=f) for f in range(10)]
        cfg = SamplingConfig(interval=2, confidence_threshold=0.0)
        assert [d.frame for d in sample_and_filter(dets, cfg)] == [0, 2, 4, 6, 8]

    def test_threshold_boundary_inclusive(self):
        dets = [
            make_detection(frame=0, confidence=c, detection_id=i)
            for i, c in enumerate([0.05, 0.1, 0.5])
        ]
        cfg = SamplingConfig(interval=1, confidence_threshold=0.1)
        kept = sample_and_filter(dets, cfg)
        assert [d.confidence for d in kept] == [0.1, 0.5]

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        dets = [
            make_detection(frame=f, confidence=float(rng.uniform(0, 1)), detection_id=f)
            for f in range(100)
        ]
        cfg = SamplingConfig(interval=3, confidence_threshold=0.4)
        once = sample_and_filter(dets, cfg)
        assert sample_and_filter(once, cfg) == once

    def test_output_is_subsequence(self):
        dets = [make_detection(frame=f, confidence=0.3 + 0.01 * f) for f in range(50)]
        cfg = SamplingConfig(interval=2, confidence_threshold=0.5)
        kept = sample_and_filter(dets, cfg)
        it = iter(dets)
        assert all(any(k is d for d in it) for k in kept)

    def test_validation(self):
        with pytest.raises(ValueError):
            SamplingConfig(interval=0)
        with pytest.raises(ValueError):
            SamplingConfig(fps=0)
