"""Exact k-nearest-neighbor graph construction.

Brute force with chunked distance blocks: O(N^2) time, O(chunk * N) memory.
Fine at desk scale (a few hundred thousand rows); approximate backends can
slot in behind the same NeighborGraph contract if that ever stops being true.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CHUNK_ROWS = 256


@dataclass
class NeighborGraph:
    """k nearest neighbors per point, distances ascending, never self."""

    k: int
    indices: np.ndarray  # (N, k) int64
    distances: np.ndarray  # (N, k) float64

    @property
    def n_points(self) -> int:
        return self.indices.shape[0]

    def validate(self) -> None:
        n, k = self.indices.shape
        if (self.indices == np.arange(n)[:, None]).any():
            raise ValueError("graph contains a self-neighbor")
        if (np.diff(self.distances, axis=1) < 0).any():
            raise ValueError("distances are not ascending")
        if self.indices.min() < 0 or self.indices.max() >= n:
            raise ValueError("neighbor id outside dataset")


def _distance_block(chunk: np.ndarray, data: np.ndarray, sq_norms: np.ndarray) -> np.ndarray:
    """Squared euclidean distances from each chunk row to every data row."""
    d2 = (chunk**2).sum(axis=1)[:, None] + sq_norms[None, :] - 2.0 * (chunk @ data.T)
    return np.maximum(d2, 0.0)


def _rank_neighbors(d2_block: np.ndarray, k: int, exclude_diag_offset: int | None) -> tuple[np.ndarray, np.ndarray]:
    """Indices and distances of the k smallest entries per row, ties to lower id."""
    rows = d2_block.shape[0]
    if exclude_diag_offset is not None:
        r = np.arange(rows)
        d2_block[r, r + exclude_diag_offset] = np.inf

    # Stable sort keeps equal distances in ascending-id order.
    idx = np.argsort(d2_block, axis=1, kind="stable")[:, :k]
    dist = np.sqrt(np.take_along_axis(d2_block, idx, axis=1))
    return idx.astype(np.int64), dist


def knn_exact(matrix: np.ndarray, k: int, metric: str = "euclidean") -> NeighborGraph:
    """Exact k nearest neighbors of every row against the whole matrix.

    Ties are broken toward the lower row id.  Raises ValueError unless
    1 <= k < N.
    """
    if metric != "euclidean":
        raise ValueError(f"unsupported metric {metric!r}")
    matrix = np.asarray(matrix, dtype=np.float64)
    n = matrix.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k >= n:
        raise ValueError(f"k={k} must be smaller than the dataset size N={n}")

    sq_norms = (matrix**2).sum(axis=1)
    indices = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k), dtype=np.float64)
    for start in range(0, n, CHUNK_ROWS):
        stop = min(start + CHUNK_ROWS, n)
        block = _distance_block(matrix[start:stop], matrix, sq_norms)
        idx, dist = _rank_neighbors(block, k, exclude_diag_offset=start)
        indices[start:stop] = idx
        distances[start:stop] = dist
    return NeighborGraph(k=k, indices=indices, distances=distances)


def cross_knn(queries: np.ndarray, data: np.ndarray, k: int) -> NeighborGraph:
    """k nearest data rows for each query row (self-matches allowed)."""
    queries = np.asarray(queries, dtype=np.float64)
    data = np.asarray(data, dtype=np.float64)
    if queries.shape[1] != data.shape[1]:
        raise ValueError(
            f"query dimension {queries.shape[1]} != data dimension {data.shape[1]}"
        )
    if not (1 <= k <= data.shape[0]):
        raise ValueError("k must be in [1, len(data)]")

    sq_norms = (data**2).sum(axis=1)
    nq = queries.shape[0]
    indices = np.empty((nq, k), dtype=np.int64)
    distances = np.empty((nq, k), dtype=np.float64)
    for start in range(0, nq, CHUNK_ROWS):
        stop = min(start + CHUNK_ROWS, nq)
        block = _distance_block(queries[start:stop], data, sq_norms)
        idx, dist = _rank_neighbors(block, k, exclude_diag_offset=None)
        indices[start:stop] = idx
        distances[start:stop] = dist
    return NeighborGraph(k=k, indices=indices, distances=distances)
