import json
import threading

import numpy as np
import pytest

from homecage.embed.projection import EmbeddingModel
from homecage.explore import (
    DiscRegion,
    EnsembleClip,
    LabelStore,
    RectRegion,
    RegionError,
    canny,
    ensemble,
    export_clip,
    query_region,
    region_from_json,
)
from homecage.ingest import FrameStack, load_frames


def model_of(coords, index=None):
    coords = np.asarray(coords, dtype=np.float32)
    return EmbeddingModel(
        coordinates=coords,
        a=1.9,
        b=0.8,
        n_neighbors=5,
        min_dist=0.0,
        seed=0,
        epochs=10,
        index=index or [("v", i) for i in range(coords.shape[0])],
    )


class TestRegions:
    def test_rect_validation(self):
        with pytest.raises(RegionError):
            RectRegion(1.0, 1.0, 0.0, 2.0)

    def test_disc_validation(self):
        with pytest.raises(RegionError):
            DiscRegion(0.0, 0.0, 0.0)

    def test_json_round_trip(self):
        rect = RectRegion(-1.0, 2.0, -3.0, 4.0)
        disc = DiscRegion(1.0, 2.0, 3.0)
        assert region_from_json(rect.to_json()) == rect
        assert region_from_json(disc.to_json()) == disc

    def test_malformed_json_rejected(self):
        with pytest.raises(RegionError):
            region_from_json({"blob": [1, 2, 3]})
        with pytest.raises(RegionError):
            region_from_json({"rect": [1, 2, 3]})


class TestQueryRegion:
    def test_full_bounding_box_selects_all(self, rng):
        coords = rng.normal(size=(500, 2))
        model = model_of(coords)
        region = RectRegion(
            coords[:, 0].min() - 1, coords[:, 0].max() + 1,
            coords[:, 1].min() - 1, coords[:, 1].max() + 1,
        )
        ids, counts = query_region(model, region)
        assert ids.size == 500
        assert counts == {"v": 500}

    def test_empty_region(self, rng):
        model = model_of(rng.normal(size=(100, 2)))
        ids, counts = query_region(model, RectRegion(100.0, 101.0, 100.0, 101.0))
        assert ids.size == 0
        assert counts == {}

    def test_rect_inclusive_bounds(self):
        model = model_of([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        ids, _ = query_region(model, RectRegion(0.0, 1.0, 0.0, 1.0))
        assert ids.tolist() == [0, 1]

    def test_disc_boundary_inclusive(self):
        model = model_of([[3.0, 0.0], [3.1, 0.0]])
        ids, _ = query_region(model, DiscRegion(0.0, 0.0, 3.0))
        assert ids.tolist() == [0]

    def test_matches_linear_scan_10000(self, rng):
        coords = rng.uniform(-10, 10, size=(10000, 2))
        model = model_of(coords)
        rect = RectRegion(-3.0, 4.0, -1.0, 7.5)
        ids, _ = query_region(model, rect)
        scan = [
            i
            for i in range(10000)
            if -3.0 <= coords[i, 0] <= 4.0 and -1.0 <= coords[i, 1] <= 7.5
        ]
        assert ids.tolist() == scan

    def test_per_video_counts(self, rng):
        coords = np.zeros((6, 2))
        index = [("a", 0), ("a", 1), ("b", 0), ("b", 1), ("b", 2), ("c", 0)]
        model = model_of(coords, index=index)
        _, counts = query_region(model, DiscRegion(0.0, 0.0, 1.0))
        assert counts == {"a": 2, "b": 3, "c": 1}


class TestLabelStore:
    def test_add_then_list(self, tmp_path):
        store = LabelStore(tmp_path / "labels.json")
        label_id = store.add(RectRegion(0, 1, 0, 1), "eating on tunnel", author="me")
        labels = store.list()
        assert len(labels) == 1
        assert labels[0].label_id == label_id
        assert labels[0].text == "eating on tunnel"
        assert labels[0].region == RectRegion(0, 1, 0, 1)

    def test_delete_idempotent(self, tmp_path):
        store = LabelStore(tmp_path / "labels.json")
        label_id = store.add(DiscRegion(0, 0, 1), "x")
        assert store.delete(label_id) is True
        assert store.delete(label_id) is False  # second call succeeds, no-op
        assert store.list() == []

    def test_persistence_replay_100_random_sequences(self, tmp_path, rng):
        for trial in range(100):
            path = tmp_path / f"labels{trial}.json"
            store = LabelStore(path)
            live = {}
            for _ in range(int(rng.integers(1, 12))):
                if live and rng.random() < 0.4:
                    victim = int(rng.choice(list(live)))
                    store.delete(victim)
                    live.pop(victim)
                else:
                    new_id = store.add(DiscRegion(0, 0, float(rng.uniform(1, 5))), f"t{trial}")
                    live[new_id] = True
            reopened = LabelStore(path)
            assert [l.to_json() for l in reopened.list()] == [
                l.to_json() for l in store.list()
            ]

    def test_ids_unique_after_reopen(self, tmp_path):
        path = tmp_path / "labels.json"
        store = LabelStore(path)
        a = store.add(DiscRegion(0, 0, 1), "a")
        store2 = LabelStore(path)
        b = store2.add(DiscRegion(0, 0, 1), "b")
        assert b != a

    def test_concurrent_writers_serialize(self, tmp_path):
        store = LabelStore(tmp_path / "labels.json")

        def writer(i):
            store.add(DiscRegion(0, 0, 1 + i), f"label{i}")

        threads = [threading.Thread(target=writer, args=(i,)) for i in range(20)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        labels = store.list()
        assert len(labels) == 20
        assert len({l.label_id for l in labels}) == 20
        reopened = LabelStore(tmp_path / "labels.json")
        assert len(reopened.list()) == 20


def step_image(width=64, height=32, level=255):
    img = np.zeros((height, width), dtype=np.float64)
    img[:, width // 2 :] = level
    return img


class TestCanny:
    def test_constant_image_no_edges(self):
        out = canny(np.full((30, 40), 137.0), 20, 60)
        assert (out == 0).all()

    def test_vertical_step_single_column(self):
        out = canny(step_image(), 20, 60)
        cols = np.unique(np.nonzero(out)[1])
        assert len(cols) == 1
        assert abs(int(cols[0]) - 31.5) <= 1.0  # within 1 px of the boundary

    def test_output_binary(self):
        out = canny(step_image(), 20, 60)
        assert set(np.unique(out)) <= {0.0, 1.0}

    def test_one_pixel_wide_rows_too(self):
        img = step_image().T.copy()  # horizontal step
        out = canny(img, 20, 60)
        rows = np.unique(np.nonzero(out)[0])
        assert len(rows) == 1

    def test_invariant_under_inversion(self):
        img = step_image()
        a = canny(img, 20, 60)
        b = canny(255.0 - img, 20, 60)
        assert np.array_equal(a, b)

    def test_weak_edges_need_strong_anchor(self):
        # low-contrast step alone: magnitude above low but below high
        img = step_image(level=20)
        out = canny(img, low=5.0, high=1e9)
        assert (out == 0).all()

    def test_thresholds_validated(self):
        with pytest.raises(ValueError):
            canny(step_image(), 60, 20)

    def test_hysteresis_connects_weak_to_strong(self):
        # one straight vertical edge whose contrast fades along its length:
        # the weak tail survives only through connectivity to the strong head
        img = np.zeros((40, 40))
        levels = 255.0 - 5.0 * np.arange(40)  # 255 at top, 60 at bottom
        img[:, 20:] = levels[:, None]
        out = canny(img, low=50.0, high=300.0)
        assert out[:5].any()  # strong head
        assert out[35:].any()  # weak tail kept via the chain
        # without a strong anchor the same weak tail disappears
        gone = canny(img, low=50.0, high=1e9)
        assert not gone.any()


class TestEnsemble:
    def build_stack(self, object_col, n_frames=3, video_id="v"):
        # static background edge at column 10, object edge at object_col
        frames = np.zeros((n_frames, 32, 64), dtype=np.uint8)
        frames[:, :, 10:] = 90
        frames[:, :, object_col:] = 200
        return FrameStack(video_id=video_id, frames=frames)

    def test_single_window_is_its_own_canny(self):
        stack = self.build_stack(40)
        clip = ensemble([("v", 0)], lambda vid: stack, omega=3, low=20, high=60)
        assert clip.window_count == 1
        for t in range(3):
            expected = canny(stack.frames[t].astype(np.float64), 20, 60)
            np.testing.assert_array_equal(clip.frames[t], expected)

    def test_duplicate_windows_idempotent(self):
        stack = self.build_stack(40)
        one = ensemble([("v", 0)], lambda vid: stack, omega=3, low=20, high=60)
        many = ensemble([("v", 0)] * 4, lambda vid: stack, omega=3, low=20, high=60)
        np.testing.assert_array_equal(one.frames, many.frames)

    def test_two_windows_background_1_object_half(self):
        stacks = {"a": self.build_stack(30, video_id="a"), "b": self.build_stack(50, video_id="b")}
        clip = ensemble(
            [("a", 0), ("b", 0)], lambda vid: stacks.get(vid), omega=3, low=20, high=60
        )
        edge_a = canny(stacks["a"].frames[0].astype(np.float64), 20, 60)
        edge_b = canny(stacks["b"].frames[0].astype(np.float64), 20, 60)
        shared = (edge_a == 1) & (edge_b == 1)  # static background columns
        only_a = (edge_a == 1) & (edge_b == 0)
        only_b = (edge_b == 1) & (edge_a == 0)
        assert shared.any() and only_a.any() and only_b.any()
        frame = clip.frames[0]
        assert (frame[shared] == 1.0).all()
        assert (frame[only_a] == 0.5).all()
        assert (frame[only_b] == 0.5).all()

    def test_permutation_invariance(self):
        stacks = {"a": self.build_stack(30, video_id="a"), "b": self.build_stack(50, video_id="b")}
        fwd = ensemble([("a", 0), ("b", 0)], lambda v: stacks.get(v), omega=2, low=20, high=60)
        rev = ensemble([("b", 0), ("a", 0)], lambda v: stacks.get(v), omega=2, low=20, high=60)
        np.testing.assert_allclose(fwd.frames, rev.frames, atol=1e-15)

    def test_missing_frames_skipped_with_warning(self, caplog):
        stack = self.build_stack(3)
        refs = [("v", 0), ("ghost", 0), ("v", 5)]  # 5+3 > 3 frames
        with caplog.at_level("WARNING"):
            clip = ensemble(refs, lambda vid: stack if vid == "v" else None, omega=3, low=20, high=60)
        assert clip.window_count == 1
        assert sum("skipping window" in r.message for r in caplog.records) == 2

    def test_zero_usable_windows_raises(self):
        with pytest.raises(ValueError, match="no usable windows"):
            ensemble([("ghost", 0)], lambda vid: None, omega=3)

    def test_empty_refs_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            ensemble([], lambda vid: None, omega=3)


class TestExportClip:
    def make_clip(self, omega=4):
        frames = np.linspace(0, 1, omega * 6 * 8).reshape(omega, 6, 8)
        frames /= frames.max()
        return EnsembleClip(frames=frames, window_count=2, region=DiscRegion(0, 0, 1))

    def test_file_count_and_names(self, tmp_path):
        clip = self.make_clip(omega=60)
        paths = export_clip(clip, tmp_path)
        assert len(paths) == 60
        assert paths[0].name == "000000.png"
        assert paths[-1].name == "000059.png"
        assert (tmp_path / "clip.json").exists()

    def test_intensity_one_maps_to_255(self, tmp_path):
        clip = EnsembleClip(frames=np.ones((1, 4, 4)), window_count=1)
        export_clip(clip, tmp_path)
        frames = load_frames(tmp_path, (0, 0))
        assert (frames.frames == 255).all()

    def test_reexport_byte_identical(self, tmp_path):
        clip = self.make_clip()
        export_clip(clip, tmp_path / "a")
        export_clip(clip, tmp_path / "b")
        for t in range(4):
            name = f"{t:06d}.png"
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        assert (tmp_path / "a" / "clip.json").read_bytes() == (
            tmp_path / "b" / "clip.json"
        ).read_bytes()

    def test_metadata_content(self, tmp_path):
        clip = self.make_clip()
        export_clip(clip, tmp_path)
        meta = json.loads((tmp_path / "clip.json").read_text())
        assert meta["window_count"] == 2
        assert meta["n_frames"] == 4
        assert meta["region"] == {"disc": [0.0, 0.0, 1.0]}
