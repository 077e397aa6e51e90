import json
from pathlib import Path

import numpy as np
import pytest

from homecage.pipeline import (
    ConfigError,
    PipelineConfig,
    build_config,
    parse_config_text,
    run_pipeline,
    source_video_of,
)
from homecage.synth import generate

FAST = dict(neighbors=30, epochs=80, min_dist=0.0)


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("bm")
    generate("behavior-modes", seed=0, out_dir=root)
    return root


def fast_config(corpus, out_dir, **extra):
    params = dict(
        detections_dir=str(corpus / "detections"),
        pose_dir=str(corpus / "pose"),
        out_dir=str(out_dir),
        **FAST,
    )
    params.update(extra)
    return PipelineConfig(**params)


class TestConfig:
    def test_parse_key_value_text(self):
        values = parse_config_text("omega = 30\n# comment\nseed=3\n\ninterp = linear\n")
        assert values == {"omega": "30", "seed": "3", "interp": "linear"}

    def test_bad_line_rejected(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config_text("omega 30")

    def test_overrides_win(self):
        config = build_config({"omega": "30", "seed": "3"}, {"seed": 9})
        assert config.omega == 30
        assert config.seed == 9

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            build_config({"omegas": "30"})

    def test_bool_parsing(self):
        assert build_config({"smooth": "false"}).smooth is False
        assert build_config({"smooth": "yes"}).smooth is True
        with pytest.raises(ConfigError):
            build_config({"smooth": "maybe"})

    @pytest.mark.parametrize(
        "field,value",
        [
            ("geomean_threshold", 1.01),
            ("confidence", -0.1),
            ("tau", 2.0),
            ("min_dist", 1.5),
            ("omega", 0),
            ("interp", "spline"),
        ],
    )
    def test_domain_validation(self, field, value):
        config = PipelineConfig(detections_dir="x", pose_dir="y", **{field: value})
        with pytest.raises(ConfigError):
            config.validate()

    def test_report_echoes_every_parameter(self, corpus, tmp_path):
        config = fast_config(corpus, tmp_path / "run")
        report = run_pipeline(config)
        from dataclasses import fields

        for f in fields(PipelineConfig):
            assert f.name in report.parameters


class TestSourceVideoOf:
    def test_strips_track_suffix(self):
        assert source_video_of("modes00.t0") == "modes00"
        assert source_video_of("modes00.t12") == "modes00"

    def test_plain_video_untouched(self):
        assert source_video_of("modes00") == "modes00"
        assert source_video_of("cage.two") == "cage.two"


class TestRunPipeline:
    def test_artifacts_written(self, corpus, tmp_path):
        out = tmp_path / "run"
        report = run_pipeline(fast_config(corpus, out))
        for name in (
            "segments.jsonl",
            "quality.csv",
            "selected.json",
            "rejected.json",
            "windows.f32",
            "windows.index.csv",
            "windows.meta.json",
            "embedding.f32",
            "embedding.json",
            "report.json",
        ):
            assert (out / name).exists(), name
        assert report.counts["videos_in"] == 6
        assert report.counts["segments_kept"] == 6
        assert report.counts["windows_built"] == 6 * (500 - 60 + 1)
        assert report.counts["embedding_points"] == report.counts["windows_built"]

    def test_rerun_byte_identical(self, corpus, tmp_path):
        config_a = fast_config(corpus, tmp_path / "a")
        config_b = fast_config(corpus, tmp_path / "b")
        run_pipeline(config_a)
        run_pipeline(config_b)
        names = [
            "segments.jsonl",
            "quality.csv",
            "selected.json",
            "rejected.json",
            "windows.f32",
            "windows.index.csv",
            "windows.meta.json",
            "embedding.f32",
        ]
        names += [f"clean/{p.name}" for p in sorted((tmp_path / "a" / "clean").iterdir())]
        for name in names:
            a = (tmp_path / "a" / name).read_bytes()
            b = (tmp_path / "b" / name).read_bytes()
            assert a == b, name
        # report.json matches except the parameter echo of out_dir and timings
        ra = json.loads((tmp_path / "a" / "report.json").read_text())
        rb = json.loads((tmp_path / "b" / "report.json").read_text())
        assert ra["counts"] == rb["counts"]
        ra["parameters"].pop("out_dir"), rb["parameters"].pop("out_dir")
        assert ra["parameters"] == rb["parameters"]

    def test_missing_inputs_fail_before_work(self, tmp_path):
        config = PipelineConfig(
            detections_dir=str(tmp_path / "none"), pose_dir=str(tmp_path / "none"),
            out_dir=str(tmp_path / "run"),
        )
        with pytest.raises(ConfigError):
            run_pipeline(config)
        assert not (tmp_path / "run" / "report.json").exists()

    def test_neighbors_larger_than_windows_rejected(self, corpus, tmp_path):
        config = fast_config(corpus, tmp_path / "run", neighbors=100000)
        with pytest.raises(ConfigError, match="neighbors"):
            run_pipeline(config)

    def test_window_provenance_uses_source_frames(self, corpus, tmp_path):
        out = tmp_path / "run"
        run_pipeline(fast_config(corpus, out))
        from homecage.windows import WindowDataset

        ds = WindowDataset.load(out)
        truth = json.loads((corpus / "truth.json").read_text())
        frames_per_video = len(truth["videos"][0]["modes"])
        for video_id, start in ds.index:
            assert source_video_of(video_id) in {v["video_id"] for v in truth["videos"]}
            assert 0 <= start <= frames_per_video - ds.omega
