import numpy as np
import pytest

from homecage.ingest import PoseSeries


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def purity(labels_true, labels_pred) -> float:
    """Fraction of points whose cluster's majority label matches their own."""
    labels_true = np.asarray(labels_true)
    labels_pred = np.asarray(labels_pred)
    correct = 0
    for cluster in np.unique(labels_pred):
        members = labels_true[labels_pred == cluster]
        _, counts = np.unique(members, return_counts=True)
        correct += counts.max()
    return correct / labels_true.shape[0]


def kmeans_labels(points, k, seed=0):
    from sklearn.cluster import KMeans

    return KMeans(n_clusters=k, n_init=10, random_state=seed).fit_predict(points)


def random_pose_series(rng, n_frames=None, n_parts=None, missing_rate=0.15, video_id="vid"):
    """Random PoseSeries with MISSING holes, for round-trip style tests."""
    n_frames = n_frames or int(rng.integers(1, 30))
    n_parts = n_parts or int(rng.integers(1, 5))
    xy = rng.uniform(0, 1000, size=(n_frames, n_parts, 2)).round(3)
    likelihood = rng.uniform(0, 1, size=(n_frames, n_parts)).round(4)
    holes = rng.random((n_frames, n_parts)) < missing_rate
    xy[holes] = np.nan
    likelihood[holes] = np.nan
    return PoseSeries(
        video_id=video_id,
        bodyparts=[f"part{i}" for i in range(n_parts)],
        xy=xy,
        likelihood=likelihood,
        scorer="tester",
    )
