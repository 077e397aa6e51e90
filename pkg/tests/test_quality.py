import numpy as np
import pytest

from homecage.ingest import PoseSeries
from homecage.quality import (
    QualityReport,
    bodypart_quality,
    compute_report,
    geomean_quality,
    mask_low_likelihood,
    report_csv,
    select_videos,
)

from conftest import random_pose_series


def pose_from_likelihoods(likelihoods, video_id="v"):
    """(frames, parts) likelihood array -> PoseSeries with unit positions."""
    lk = np.asarray(likelihoods, dtype=np.float64)
    xy = np.ones((*lk.shape, 2))
    xy[np.isnan(lk)] = np.nan
    return PoseSeries(
        video_id=video_id,
        bodyparts=[f"p{i}" for i in range(lk.shape[1])],
        xy=xy,
        likelihood=lk,
    )


class TestMaskLowLikelihood:
    def test_paper_boundary(self):
        pose = pose_from_likelihoods([[0.49], [0.5], [0.51]])
        masked = mask_low_likelihood(pose, 0.5)
        assert masked.missing_mask()[0, 0]
        assert not masked.missing_mask()[1, 0]
        assert not masked.missing_mask()[2, 0]

    def test_tau_zero_identity(self):
        pose = pose_from_likelihoods([[0.01], [0.99]])
        masked = mask_low_likelihood(pose, 0.0)
        assert masked.equals(pose)

    def test_masked_count_matches_direct_scan(self, rng):
        for _ in range(25):
            pose = random_pose_series(rng)
            tau = float(rng.uniform(0, 1))
            masked = mask_low_likelihood(pose, tau)
            with np.errstate(invalid="ignore"):
                expected = (pose.likelihood < tau) | pose.missing_mask()
            assert (masked.missing_mask() == expected).all()

    def test_idempotent(self, rng):
        pose = random_pose_series(rng)
        once = mask_low_likelihood(pose, 0.5)
        twice = mask_low_likelihood(once, 0.5)
        assert twice.equals(once)


class TestBodypartQuality:
    def test_all_ones(self):
        pose = pose_from_likelihoods([[1.0], [1.0], [1.0]])
        assert bodypart_quality(pose, "p0") == 1.0

    def test_simple_mean(self):
        pose = pose_from_likelihoods([[0.2], [0.4]])
        assert bodypart_quality(pose, "p0") == pytest.approx(0.3)

    def test_missing_counts_as_zero(self):
        pose = pose_from_likelihoods([[0.8], [np.nan]])
        assert bodypart_quality(pose, "p0") == pytest.approx(0.4)

    def test_unknown_part_raises(self):
        pose = pose_from_likelihoods([[0.8]])
        with pytest.raises(KeyError):
            bodypart_quality(pose, "nose")


class TestGeomeanQuality:
    def test_exact_sqrt(self):
        pose = pose_from_likelihoods([[0.25, 1.0]])
        assert geomean_quality(pose, ["p0", "p1"]) == pytest.approx(0.5, abs=1e-15)

    def test_equal_means_identity(self):
        pose = pose_from_likelihoods([[0.7, 0.7, 0.7]])
        assert geomean_quality(pose, ["p0", "p1", "p2"]) == pytest.approx(0.7, abs=1e-12)

    def test_zero_factor_gives_zero(self):
        pose = pose_from_likelihoods([[0.0, 0.9]])
        assert geomean_quality(pose, ["p0", "p1"]) == 0.0

    def test_empty_parts_rejected(self):
        pose = pose_from_likelihoods([[0.5]])
        with pytest.raises(ValueError):
            geomean_quality(pose, [])

    def test_am_gm_inequality_1000_vectors(self, rng):
        for _ in range(1000):
            n = int(rng.integers(1, 8))
            values = rng.uniform(0.01, 1.0, size=(1, n))
            pose = pose_from_likelihoods(values)
            parts = list(pose.bodyparts)
            geo = geomean_quality(pose, parts)
            assert geo <= values.mean() + 1e-12

    def test_matches_log_space_oracle(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 8))
            values = rng.uniform(0.01, 1.0, size=(1, n))
            pose = pose_from_likelihoods(values)
            expected = float(np.exp(np.mean(np.log(values[0]))))
            assert geomean_quality(pose, list(pose.bodyparts)) == pytest.approx(
                expected, abs=1e-12
            )

    def test_scale_free_ranking(self, rng):
        poses = [pose_from_likelihoods(rng.uniform(0.1, 1.0, (1, 4))) for _ in range(8)]
        parts = list(poses[0].bodyparts)
        base = [geomean_quality(p, parts) for p in poses]
        c = 0.37
        scaled = [
            geomean_quality(pose_from_likelihoods(p.likelihood * c), parts)
            for p in poses
        ]
        assert np.argsort(base).tolist() == np.argsort(scaled).tolist()


def report(video_id, geomean, missing=0.0):
    return QualityReport(
        video_id=video_id, part_means={}, geomean=geomean,
        missing_fraction_after_mask=missing,
    )


class TestSelectVideos:
    def test_boundary_inclusive(self):
        reports = [report("a", 0.29), report("b", 0.30), report("c", 0.8)]
        selected, _ = select_videos(reports, 0.3)
        assert selected == ["b", "c"]

    def test_threshold_zero_selects_all(self):
        reports = [report("a", 0.0), report("b", 0.5)]
        selected, _ = select_videos(reports, 0.0)
        assert selected == ["a", "b"]

    def test_kept_fraction_non_increasing(self, rng):
        reports = [report(f"v{i}", float(rng.uniform(0, 1))) for i in range(40)]
        _, tradeoff = select_videos(reports, 0.3)
        assert (np.diff(tradeoff.kept_fraction) <= 1e-12).all()

    def test_higher_threshold_selects_subset(self, rng):
        reports = [report(f"v{i}", float(rng.uniform(0, 1))) for i in range(40)]
        low, _ = select_videos(reports, 0.2)
        high, _ = select_videos(reports, 0.6)
        assert set(high) <= set(low)

    def test_out_of_domain_threshold_rejected(self):
        with pytest.raises(ValueError):
            select_videos([report("a", 0.5)], 1.01)


class TestComputeReport:
    def test_quality_uses_raw_likelihoods(self):
        # the sub-tau samples still contribute their raw value to the means
        pose = pose_from_likelihoods([[0.4, 0.9], [0.4, 0.9]])
        rep = compute_report(pose, ["p0", "p1"], tau=0.5)
        assert rep.part_means["p0"] == pytest.approx(0.4)
        assert rep.geomean == pytest.approx(np.sqrt(0.4 * 0.9))
        assert rep.missing_fraction_after_mask == pytest.approx(0.5)

    def test_report_csv_shape(self):
        pose = pose_from_likelihoods([[0.4, 0.9]])
        rep = compute_report(pose, ["p0", "p1"], tau=0.5)
        text = report_csv([rep], ["p0", "p1"])
        lines = text.strip().splitlines()
        assert lines[0] == "video_id,p0_mean,p1_mean,geomean,missing_fraction"
        assert len(lines) == 2
