"""Fuzzy neighborhood calibration and symmetrization.

Each point i gets a local offset rho_i (distance to its nearest neighbor)
and a scale sigma_i chosen by bisection so that its k directed neighbor
weights exp(-max(0, d - rho_i) / sigma_i) sum to log2(k).  Directed weights
are then merged into a symmetric graph by the fuzzy union u + v - u*v.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .knn import NeighborGraph

SIGMA_BRACKET = (1e-10, 1e4)
BISECTION_ITERS = 64
ROW_SUM_TOL = 1e-5


@dataclass
class FuzzyGraph:
    """Symmetric weighted neighbor graph with its calibration parameters.

    ``rows/cols/weights`` list every directed edge of the symmetrized graph
    (both orientations present, w_ij == w_ji).  ``directed`` holds the
    pre-symmetrization weights aligned with the source NeighborGraph.
    """

    n_points: int
    k: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    rhos: np.ndarray
    sigmas: np.ndarray
    directed: np.ndarray  # (N, k), aligned with NeighborGraph.indices

    def matrix(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.weights, (self.rows, self.cols)), shape=(self.n_points, self.n_points)
        )


def smooth_knn_calibration(
    distances: np.ndarray,
    n_iter: int = BISECTION_ITERS,
    bracket: tuple[float, float] = SIGMA_BRACKET,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-row (rho, sigma) such that weight rows sum to log2(k).

    Rows where every distance is <= rho (all nearest neighbors equidistant,
    or duplicates) have constant row sum k regardless of sigma; they take
    the bracket maximum and weights of exactly 1.
    """
    distances = np.asarray(distances, dtype=np.float64)
    if not np.isfinite(distances).all():
        raise ValueError("neighbor distances must be finite")
    n, k = distances.shape
    if k < 2:
        raise ValueError("calibration needs k >= 2")
    target = np.log2(k)

    positive = np.where(distances > 0.0, distances, np.inf)
    rhos = positive.min(axis=1)
    rhos[~np.isfinite(rhos)] = 0.0  # all-zero rows: duplicate points

    gaps = np.maximum(distances - rhos[:, None], 0.0)
    degenerate = (gaps == 0.0).all(axis=1)

    lo = np.full(n, bracket[0])
    hi = np.full(n, bracket[1])
    sigmas = 0.5 * (lo + hi)
    for _ in range(n_iter):
        row_sum = np.exp(-gaps / sigmas[:, None]).sum(axis=1)
        too_big = row_sum > target
        hi = np.where(too_big, sigmas, hi)
        lo = np.where(too_big, lo, sigmas)
        sigmas = 0.5 * (lo + hi)
    sigmas[degenerate] = bracket[1]
    return rhos, sigmas


def _symmetrize(graph: NeighborGraph, directed: np.ndarray, rhos, sigmas) -> FuzzyGraph:
    n = graph.n_points
    rows = np.repeat(np.arange(n, dtype=np.int64), graph.k)
    cols = graph.indices.reshape(-1)
    u = sp.csr_matrix((directed.reshape(-1), (rows, cols)), shape=(n, n))
    u.sum_duplicates()
    ut = u.T.tocsr()
    symmetric = u + ut - u.multiply(ut)
    coo = symmetric.tocoo()
    return FuzzyGraph(
        n_points=n,
        k=graph.k,
        rows=coo.row.astype(np.int64),
        cols=coo.col.astype(np.int64),
        weights=coo.data.astype(np.float64),
        rhos=rhos,
        sigmas=sigmas,
        directed=directed,
    )


def calibrate_fuzzy(graph: NeighborGraph) -> FuzzyGraph:
    """Calibrate local scales and build the symmetric fuzzy graph."""
    rhos, sigmas = smooth_knn_calibration(graph.distances)
    gaps = np.maximum(graph.distances - rhos[:, None], 0.0)
    directed = np.exp(-gaps / sigmas[:, None])
    return _symmetrize(graph, directed, rhos, sigmas)


def single_neighbor_fuzzy(graph: NeighborGraph) -> FuzzyGraph:
    """Degenerate k=1 graph: each point's sole nearest neighbor at weight 1.

    The log2(k) row-sum target is meaningless at k=1, so no calibration
    happens; sigma takes the bracket maximum by the same clamp convention as
    all-equidistant rows.
    """
    if graph.k != 1:
        raise ValueError("single_neighbor_fuzzy is only for k == 1 graphs")
    n = graph.n_points
    directed = np.ones((n, 1))
    rhos = graph.distances[:, 0].astype(np.float64)
    sigmas = np.full(n, SIGMA_BRACKET[1])
    return _symmetrize(graph, directed, rhos, sigmas)
