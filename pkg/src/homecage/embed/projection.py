"""Fit and transform for the 2-D manifold projection.

``umap_fit`` composes the stages: exact kNN graph, fuzzy calibration, curve
fit, stochastic layout.  ``umap_transform`` places new points relative to a
frozen training embedding: initialized at the calibrated-weight mean of
their training neighbors, then refined with a short SGD run in which only
the new points move.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .curve import fit_ab
from .fuzzy import calibrate_fuzzy, single_neighbor_fuzzy, smooth_knn_calibration
from .knn import cross_knn, knn_exact
from .layout import layout_sgd, run_sgd

COORDS_FILE = "embedding.f32"
MODEL_FILE = "embedding.json"

TRANSFORM_EPOCHS = 30


@dataclass
class EmbeddingModel:
    """A fitted 2-D projection with enough state to embed new points."""

    coordinates: np.ndarray  # (N, dims) float32
    a: float
    b: float
    n_neighbors: int
    min_dist: float
    seed: int
    epochs: int
    index: list[tuple[str, int]]  # row provenance: (video_id, start_frame)
    training_data: np.ndarray | None = None  # (N, d) float32
    dims: int = 2
    init: str = "spectral"
    meta: dict = field(default_factory=dict)

    @property
    def n_points(self) -> int:
        return self.coordinates.shape[0]

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        np.ascontiguousarray(self.coordinates, dtype="<f4").tofile(directory / COORDS_FILE)
        payload = {
            "a": self.a,
            "b": self.b,
            "n_neighbors": self.n_neighbors,
            "min_dist": self.min_dist,
            "seed": self.seed,
            "epochs": self.epochs,
            "dims": self.dims,
            "init": self.init,
            "n_points": self.n_points,
            "meta": self.meta,
        }
        with open(directory / MODEL_FILE, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(
        cls,
        directory: str | Path,
        index: list[tuple[str, int]] | None = None,
        training_data: np.ndarray | None = None,
    ) -> "EmbeddingModel":
        directory = Path(directory)
        with open(directory / MODEL_FILE, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        coords = np.fromfile(directory / COORDS_FILE, dtype="<f4").reshape(
            payload["n_points"], payload["dims"]
        )
        return cls(
            coordinates=coords,
            a=payload["a"],
            b=payload["b"],
            n_neighbors=payload["n_neighbors"],
            min_dist=payload["min_dist"],
            seed=payload["seed"],
            epochs=payload["epochs"],
            index=index if index is not None else [("", 0)] * payload["n_points"],
            training_data=training_data,
            dims=payload["dims"],
            init=payload.get("init", "spectral"),
            meta=payload.get("meta", {}),
        )


def umap_fit(
    matrix: np.ndarray,
    n_neighbors: int = 200,
    min_dist: float = 0.0,
    seed: int = 0,
    epochs: int = 500,
    dims: int = 2,
    init: str = "spectral",
    negative_rate: int = 5,
    lr0: float = 1.0,
    index: list[tuple[str, int]] | None = None,
    parallel: bool = False,
) -> EmbeddingModel:
    """Fit the nonlinear projection on the rows of ``matrix``."""
    matrix = np.asarray(matrix, dtype=np.float64)
    n = matrix.shape[0]
    if n_neighbors >= n:
        raise ValueError(f"n_neighbors={n_neighbors} must be < N={n}")

    graph = knn_exact(matrix, n_neighbors)
    fuzzy = calibrate_fuzzy(graph) if n_neighbors >= 2 else single_neighbor_fuzzy(graph)
    a, b = fit_ab(min_dist)
    coords = layout_sgd(
        fuzzy,
        a=a,
        b=b,
        dims=dims,
        epochs=epochs,
        seed=seed,
        init=init,
        negative_rate=negative_rate,
        lr0=lr0,
        parallel=parallel,
    )
    return EmbeddingModel(
        coordinates=coords,
        a=a,
        b=b,
        n_neighbors=n_neighbors,
        min_dist=min_dist,
        seed=seed,
        epochs=epochs,
        index=index if index is not None else [("", i) for i in range(n)],
        training_data=matrix,  # the exact float64 view knn saw, so transform
        dims=dims,             # of a training row reproduces distance 0
        init=init,
    )


def _transform_init(
    model: EmbeddingModel, indices: np.ndarray, weights: np.ndarray, distances: np.ndarray
) -> np.ndarray:
    """Weight-averaged neighbor coordinates; exact duplicates snap to their twin."""
    coords = np.empty((indices.shape[0], model.dims), dtype=np.float64)
    train = model.coordinates
    for i in range(indices.shape[0]):
        if distances[i, 0] == 0.0:
            coords[i] = train[indices[i, 0]]
            continue
        w = weights[i]
        coords[i] = (w[:, None] * train[indices[i]]).sum(axis=0) / w.sum()
    return coords


def umap_transform(
    model: EmbeddingModel,
    matrix: np.ndarray,
    epochs: int = TRANSFORM_EPOCHS,
    seed: int | None = None,
    negative_rate: int = 5,
    lr0: float = 1.0,
) -> np.ndarray:
    """Embed new rows against the frozen training embedding."""
    if model.training_data is None:
        raise ValueError("model carries no training data; reload it with the dataset")
    matrix = np.asarray(matrix, dtype=np.float64)
    train = np.asarray(model.training_data, dtype=np.float64)
    if matrix.shape[1] != train.shape[1]:
        raise ValueError(
            f"input dimension {matrix.shape[1]} != training dimension {train.shape[1]}"
        )

    graph = cross_knn(matrix, train, model.n_neighbors)
    if model.n_neighbors >= 2:
        rhos, sigmas = smooth_knn_calibration(graph.distances)
        gaps = np.maximum(graph.distances - rhos[:, None], 0.0)
        weights = np.exp(-gaps / sigmas[:, None])
    else:
        weights = np.ones_like(graph.distances)

    coords = _transform_init(model, graph.indices, weights, graph.distances).astype(
        np.float32
    )
    if epochs > 0:
        n_new = matrix.shape[0]
        head = np.repeat(np.arange(n_new, dtype=np.int64), model.n_neighbors)
        tail = graph.indices.reshape(-1)
        run_sgd(
            head_emb=coords,
            tail_emb=model.coordinates,
            head=head,
            tail=tail,
            weights=weights.reshape(-1),
            a=model.a,
            b=model.b,
            epochs=epochs,
            seed=model.seed if seed is None else seed,
            negative_rate=negative_rate,
            lr0=lr0,
            move_other=False,
        )
    return coords
