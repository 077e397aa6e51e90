import json

import numpy as np
import pytest

from homecage.ingest import parse_detections, parse_pose_csv
from homecage.synth import (
    PROFILES,
    generate,
    make_behavior_modes,
    make_blobs,
    make_crossing_boxes,
    make_rings,
    make_spike_track,
)


class TestGenerators:
    def test_blobs_shape_and_separation(self):
        points, labels = make_blobs(seed=1)
        assert points.shape == (900, 120)
        assert labels.shape == (900,)
        centers = np.stack([points[labels == c].mean(axis=0) for c in range(3)])
        for i in range(3):
            for j in range(i + 1, 3):
                assert np.linalg.norm(centers[i] - centers[j]) >= 10.0

    def test_rings_not_linearly_separated(self):
        points, labels = make_rings(seed=1)
        assert points.shape == (800, 120)
        assert set(labels.tolist()) == {0, 1}

    def test_spike_track_truth(self):
        track, spikes = make_spike_track(seed=2, n_spikes=20)
        assert len(spikes) == 20
        assert len(set(spikes)) == 20
        assert track.shape == (2000, 2)
        # every listed spike really is a large jump from its raw predecessor
        for s in spikes:
            step = np.hypot(*(track[s] - track[s - 1]))
            assert step > 30.0

    def test_spike_track_spikes_spaced_apart(self):
        _, spikes = make_spike_track(seed=5)
        gaps = np.diff(sorted(spikes))
        assert gaps.min() >= 10

    def test_crossing_boxes_truth_consistent(self):
        records, truth = make_crossing_boxes()
        assert truth["collision_start"] == 62
        assert truth["restart"] == 89
        assert len(truth["segments"]) == 4
        # track C exists for exactly 49 frames
        c_frames = [r for r in records if len(r["boxes"]) == 4]
        assert len(c_frames) == 49

    def test_behavior_modes_frame_partition(self):
        poses, detections, truth = make_behavior_modes(seed=3)
        for video in truth["videos"]:
            modes = video["modes"]
            assert len(modes) == 500
            assert set(modes) <= {0, 1, 2}
        assert len(poses) == 6
        assert len(detections) == 6
        # pure videos first: one mode only
        assert len(set(truth["videos"][0]["modes"])) == 1
        assert len(set(truth["videos"][4]["modes"])) == 2

    def test_behavior_modes_dropouts_listed(self):
        poses, _, truth = make_behavior_modes(seed=3)
        for pose, video in zip(poses, truth["videos"]):
            for drop in video["dropouts"]:
                part = pose.bodyparts.index(drop["part"])
                window = pose.likelihood[
                    drop["start"] : drop["start"] + drop["length"], part
                ]
                assert (window < 0.5).all()


class TestGenerate:
    @pytest.mark.parametrize("profile", PROFILES)
    def test_every_profile_writes_truth(self, profile, tmp_path):
        truth = generate(profile, seed=0, out_dir=tmp_path / profile)
        assert (tmp_path / profile / "truth.json").exists()
        saved = json.loads((tmp_path / profile / "truth.json").read_text())
        assert saved["profile"] == profile
        assert truth["profile"] == profile

    def test_unknown_profile_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="unknown profile"):
            generate("wavelets", seed=0, out_dir=tmp_path)

    def test_behavior_modes_outputs_parse(self, tmp_path):
        generate("behavior-modes", seed=0, out_dir=tmp_path)
        det_files = sorted((tmp_path / "detections").glob("*.jsonl"))
        pose_files = sorted((tmp_path / "pose").glob("*.csv"))
        assert len(det_files) == 6
        assert len(pose_files) == 6
        det = parse_detections(det_files[0].read_text(), video_id="x")
        assert det.video_id == "modes00"
        assert det.frame_count() == 500
        pose = parse_pose_csv(pose_files[0].read_text())
        assert pose.n_frames == 500
        assert pose.bodyparts == ["leftear", "rightear", "snout", "lefthand", "righthand"]

    def test_spike_track_output_parses(self, tmp_path):
        truth = generate("spike-track", seed=1, out_dir=tmp_path)
        pose = parse_pose_csv((tmp_path / "pose" / "spike.csv").read_text())
        assert pose.n_frames == truth["n_frames"]
        assert len(truth["spike_frames"]) == 20

    def test_behavior_modes_frames_flag(self, tmp_path):
        generate("behavior-modes", seed=0, out_dir=tmp_path, frames=True)
        frame_files = list((tmp_path / "frames" / "modes00").glob("*.png"))
        assert len(frame_files) == 500

    def test_generation_deterministic(self, tmp_path):
        generate("behavior-modes", seed=9, out_dir=tmp_path / "a")
        generate("behavior-modes", seed=9, out_dir=tmp_path / "b")
        for rel in ["truth.json", "pose/modes03.csv", "detections/modes03.jsonl"]:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
