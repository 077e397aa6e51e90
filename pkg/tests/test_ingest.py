import json

import numpy as np
import pytest
from PIL import Image

from homecage.ingest import (
    BoundingBox,
    FormatError,
    FrameDetectionSeries,
    load_frames,
    parse_detections,
    parse_pose_csv,
    serialize_detections,
    serialize_pose_csv,
    to_luma,
)

from conftest import random_pose_series


class TestParseDetections:
    def test_single_frame_single_box(self):
        line = '{"frame":0,"boxes":[{"x0":10,"y0":10,"x1":50,"y1":40,"confidence":0.9}]}'
        series = parse_detections(line)
        assert series.frame_count() == 1
        assert series.fps == 25.0
        frame, boxes = series.frames[0]
        assert frame == 0
        assert boxes == [BoundingBox(10, 10, 50, 40, 0.9)]

    def test_empty_boxes_frame_retained(self):
        series = parse_detections('{"frame":3,"boxes":[]}')
        assert series.frames == [(3, [])]

    def test_header_sets_video_and_fps(self):
        text = '{"video_id":"cageA","fps":30}\n{"frame":0,"boxes":[]}'
        series = parse_detections(text)
        assert series.video_id == "cageA"
        assert series.fps == 30

    def test_malformed_line_reports_number(self):
        text = '{"frame":0,"boxes":[]}\nnot json'
        with pytest.raises(FormatError, match="line 2"):
            parse_detections(text)

    def test_decreasing_frame_index_rejected(self):
        text = '{"frame":1,"boxes":[]}\n{"frame":1,"boxes":[]}'
        with pytest.raises(FormatError, match="line 2"):
            parse_detections(text)

    @pytest.mark.parametrize(
        "box",
        [
            {"x0": 5, "y0": 0, "x1": 5, "y1": 10, "confidence": 0.5},
            {"x0": 0, "y0": 10, "x1": 5, "y1": 10, "confidence": 0.5},
            {"x0": 0, "y0": 0, "x1": 5, "y1": 10, "confidence": 1.5},
        ],
    )
    def test_invalid_boxes_rejected(self, box):
        text = json.dumps({"frame": 0, "boxes": [box]})
        with pytest.raises(FormatError):
            parse_detections(text)

    def test_round_trip_100_random_streams(self, rng):
        for _ in range(100):
            n_frames = int(rng.integers(0, 12))
            frames = []
            index = 0
            for _ in range(n_frames):
                index += int(rng.integers(1, 4))
                boxes = []
                for _ in range(int(rng.integers(0, 4))):
                    x0, y0 = (float(v) for v in rng.uniform(0, 500, 2).round(2))
                    w, h = (float(v) for v in rng.uniform(1, 100, 2).round(2))
                    boxes.append(
                        BoundingBox(x0, y0, x0 + w, y0 + h, round(float(rng.uniform(0, 1)), 4))
                    )
                frames.append((index, boxes))
            series = FrameDetectionSeries(video_id="rt", fps=25.0, frames=frames)
            text = serialize_detections(series)
            parsed = parse_detections(text)
            assert parsed.video_id == series.video_id
            assert parsed.fps == series.fps
            assert parsed.frames == series.frames
            # serialize(parse(s)) is stable once normalized
            assert serialize_detections(parsed) == text


POSE_CSV = (
    "scorer,net,net,net,net,net,net\n"
    "bodyparts,snout,snout,snout,tail,tail,tail\n"
    "coords,x,y,likelihood,x,y,likelihood\n"
    "0,1.0,2.0,0.9,5.0,6.0,0.8\n"
    "1,1.5,2.5,0.95,5.5,6.5,0.85\n"
)


class TestParsePoseCsv:
    def test_well_formed_two_by_two(self):
        pose = parse_pose_csv(POSE_CSV)
        assert pose.bodyparts == ["snout", "tail"]
        assert pose.n_frames == 2
        assert pose.xy[0, 0, 0] == 1.0
        assert pose.likelihood[1, 1] == 0.85
        assert not pose.missing_mask().any()

    def test_empty_likelihood_cell_is_missing(self):
        text = POSE_CSV.replace("5.0,6.0,0.8", "5.0,6.0,")
        pose = parse_pose_csv(text)
        assert pose.missing_mask()[0, 1]
        assert np.isnan(pose.xy[0, 1]).all()
        # the other samples are untouched
        assert not pose.missing_mask()[0, 0]

    def test_non_numeric_cell_is_missing(self):
        text = POSE_CSV.replace("1.5,2.5,0.95", "oops,2.5,0.95")
        pose = parse_pose_csv(text)
        assert pose.missing_mask()[1, 0]

    def test_nan_inf_map_to_missing(self):
        text = POSE_CSV.replace("1.0,2.0,0.9", "nan,2.0,0.9").replace(
            "5.5,6.5,0.85", "inf,6.5,0.85"
        )
        pose = parse_pose_csv(text)
        assert pose.missing_mask()[0, 0]
        assert pose.missing_mask()[1, 1]

    def test_likelihood_out_of_range_rejected(self):
        text = POSE_CSV.replace("0.9", "1.9")
        with pytest.raises(FormatError, match="outside"):
            parse_pose_csv(text)

    def test_arity_mismatch_rejected(self):
        text = POSE_CSV + "2,1.0,2.0,0.5\n"
        with pytest.raises(FormatError, match="line 6|row"):
            parse_pose_csv(text)

    def test_no_data_rows_rejected(self):
        text = "\n".join(POSE_CSV.splitlines()[:3]) + "\n"
        with pytest.raises(FormatError):
            parse_pose_csv(text)

    def test_round_trip_100_random_series(self, rng):
        for _ in range(100):
            pose = random_pose_series(rng)
            text = serialize_pose_csv(pose)
            parsed = parse_pose_csv(text, video_id=pose.video_id)
            assert parsed.equals(pose)

    def test_record_conservation(self, rng):
        # every input data row lands in the output, wholesale
        for _ in range(20):
            pose = random_pose_series(rng)
            parsed = parse_pose_csv(serialize_pose_csv(pose), video_id=pose.video_id)
            assert parsed.n_frames == pose.n_frames


class TestLoadFrames:
    def _write(self, directory, index, array):
        Image.fromarray(array).save(directory / f"{index:06d}.png")

    def test_stack_of_three(self, tmp_path, rng):
        for i in range(3):
            self._write(tmp_path, i, rng.integers(0, 255, (20, 30), dtype=np.uint8))
        stack = load_frames(tmp_path, (0, 2))
        assert len(stack) == 3
        assert stack.frames.shape == (3, 20, 30)

    def test_single_frame_range(self, tmp_path):
        for i in range(3):
            self._write(tmp_path, i, np.zeros((4, 4), dtype=np.uint8))
        stack = load_frames(tmp_path, (1, 1))
        assert len(stack) == 1

    def test_missing_index_raises(self, tmp_path):
        self._write(tmp_path, 0, np.zeros((4, 4), dtype=np.uint8))
        self._write(tmp_path, 2, np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(FileNotFoundError, match="000001"):
            load_frames(tmp_path, (0, 2))

    def test_inconsistent_dimensions_raise(self, tmp_path):
        self._write(tmp_path, 0, np.zeros((4, 4), dtype=np.uint8))
        self._write(tmp_path, 1, np.zeros((5, 4), dtype=np.uint8))
        with pytest.raises(FormatError, match="dimensions"):
            load_frames(tmp_path, (0, 1))

    def test_rgb_red_luma(self, tmp_path):
        rgb = np.zeros((2, 2, 3), dtype=np.uint8)
        rgb[..., 0] = 255
        Image.fromarray(rgb).save(tmp_path / "000000.png")
        stack = load_frames(tmp_path, (0, 0))
        # 255 * 0.299 = 76.245, rounded half away from zero
        assert (stack.frames == 76).all()

    def test_luma_rounding_half_away(self):
        # weighted sum 127.5 must round to 128, not bankers' 127
        rgb = np.array([[[127, 128, 127]]], dtype=np.uint8)
        expected = 127 * 0.299 + 128 * 0.587 + 127 * 0.114
        assert to_luma(rgb)[0, 0] == int(np.floor(expected + 0.5))

    def test_pgm_input(self, tmp_path):
        arr = np.arange(16, dtype=np.uint8).reshape(4, 4)
        Image.fromarray(arr).save(tmp_path / "000000.pgm")
        stack = load_frames(tmp_path, (0, 0))
        assert (stack.frames[0] == arr).all()
