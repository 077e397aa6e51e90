"""Linear baseline: principal component projection.

Mean-centered covariance eigendecomposition; component signs are fixed so
the largest-magnitude entry of each component is positive, which makes the
projection deterministic across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PcaModel:
    mean: np.ndarray  # (d,)
    components: np.ndarray  # (dims, d), orthonormal rows
    explained_variance: np.ndarray  # (dims,) eigenvalues, descending
    explained_variance_fraction: np.ndarray  # (dims,), descending

    @property
    def dims(self) -> int:
        return self.components.shape[0]


def pca_fit(matrix: np.ndarray, dims: int = 2) -> PcaModel:
    """Top-``dims`` principal components of the rows of ``matrix``."""
    matrix = np.asarray(matrix, dtype=np.float64)
    n, d = matrix.shape
    if n < 2:
        raise ValueError("PCA needs at least 2 samples")
    if dims > d:
        raise ValueError(f"dims={dims} exceeds input dimension {d}")

    mean = matrix.mean(axis=0)
    centered = matrix - mean
    cov = (centered.T @ centered) / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    components = eigvecs[:, order].T[:dims]

    # Deterministic sign: largest-magnitude entry of each component positive.
    for row in components:
        pivot = np.argmax(np.abs(row))
        if row[pivot] < 0:
            row *= -1.0

    total = eigvals.sum()
    fractions = eigvals[:dims] / total if total > 0 else np.zeros(dims)
    return PcaModel(
        mean=mean,
        components=components,
        explained_variance=eigvals[:dims],
        explained_variance_fraction=fractions,
    )


def pca_transform(model: PcaModel, matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape[1] != model.mean.shape[0]:
        raise ValueError(
            f"input dimension {matrix.shape[1]} != model dimension {model.mean.shape[0]}"
        )
    return (matrix - model.mean) @ model.components.T
