"""Hyperparameter sweep over neighbor count and min_dist.

Each configuration is fitted on the train matrix and scored on validation
transforms.  Cluster distinctness is a proxy for the visual criterion the
embedding is ultimately judged by: density-based cluster assignments on the
validation coordinates, scored by mean silhouette with noise points
excluded.  Trustworthiness is available as an alternative ranking metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.cluster import DBSCAN
from sklearn.manifold import trustworthiness
from sklearn.metrics import silhouette_score

from .knn import knn_exact
from .projection import umap_fit, umap_transform

DBSCAN_MIN_SAMPLES = 10
DBSCAN_NEIGHBOR_RANK = 10


@dataclass
class SweepRun:
    n_neighbors: int
    min_dist: float
    score: float
    metric: str
    n_clusters: int
    noise_fraction: float


def _auto_eps(coords: np.ndarray) -> float:
    """Median distance to the DBSCAN_NEIGHBOR_RANK-th neighbor, floored."""
    k = min(DBSCAN_NEIGHBOR_RANK, coords.shape[0] - 1)
    if k < 1:
        return 1.0
    graph = knn_exact(coords, k)
    eps = float(np.median(graph.distances[:, -1]))
    return max(eps, 1e-6)


def cluster_distinctness(coords: np.ndarray) -> tuple[float, int, float]:
    """(mean silhouette over density clusters, n_clusters, noise fraction).

    Returns score -1 when fewer than 2 clusters form, which ranks such
    configurations last.
    """
    coords = np.asarray(coords, dtype=np.float64)
    labels = DBSCAN(eps=_auto_eps(coords), min_samples=DBSCAN_MIN_SAMPLES).fit_predict(
        coords
    )
    keep = labels >= 0
    noise_fraction = float(1.0 - keep.mean())
    n_clusters = len(set(labels[keep].tolist()))
    if n_clusters < 2 or keep.sum() < 3:
        return -1.0, n_clusters, noise_fraction
    score = float(silhouette_score(coords[keep], labels[keep]))
    return score, n_clusters, noise_fraction


def sweep(
    train: np.ndarray,
    val: np.ndarray,
    neighbor_grid: list[int],
    min_dist_grid: list[float],
    seed: int = 0,
    epochs: int = 200,
    metric: str = "silhouette",
) -> list[SweepRun]:
    """Score every (n_neighbors, min_dist) configuration; best first.

    Ties rank deterministically by (n_neighbors, min_dist).
    """
    if not neighbor_grid or not min_dist_grid:
        raise ValueError("sweep grids must be non-empty")
    if metric not in ("silhouette", "trustworthiness"):
        raise ValueError(f"unknown ranking metric {metric!r}")

    runs = []
    for n_neighbors in neighbor_grid:
        for min_dist in min_dist_grid:
            model = umap_fit(
                train,
                n_neighbors=n_neighbors,
                min_dist=min_dist,
                seed=seed,
                epochs=epochs,
            )
            coords = umap_transform(model, val)
            if metric == "silhouette":
                score, n_clusters, noise = cluster_distinctness(coords)
            else:
                k = min(15, val.shape[0] // 2 - 1)
                score = float(trustworthiness(val, coords, n_neighbors=k))
                _, n_clusters, noise = cluster_distinctness(coords)
            runs.append(
                SweepRun(
                    n_neighbors=n_neighbors,
                    min_dist=min_dist,
                    score=score,
                    metric=metric,
                    n_clusters=n_clusters,
                    noise_fraction=noise,
                )
            )

    runs.sort(key=lambda r: (-r.score, r.n_neighbors, r.min_dist))
    return runs


def sweep_csv(runs: list[SweepRun]) -> str:
    lines = ["rank,n_neighbors,min_dist,metric,score,n_clusters,noise_fraction"]
    for rank, r in enumerate(runs, start=1):
        lines.append(
            f"{rank},{r.n_neighbors},{r.min_dist},{r.metric},"
            f"{r.score!r},{r.n_clusters},{r.noise_fraction!r}"
        )
    return "\n".join(lines) + "\n"
