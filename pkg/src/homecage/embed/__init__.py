"""Nonlinear 2-D embedding of window datasets.

Pipeline: exact kNN graph -> per-point fuzzy calibration -> low-dimensional
similarity curve fit -> stochastic graph layout; plus a PCA baseline and a
hyperparameter sweep scored on validation transforms.
"""

from .knn import NeighborGraph, knn_exact, cross_knn
from .fuzzy import FuzzyGraph, calibrate_fuzzy, smooth_knn_calibration
from .curve import fit_ab
from .layout import layout_sgd, spectral_init
from .pca import PcaModel, pca_fit, pca_transform
from .projection import EmbeddingModel, umap_fit, umap_transform
from .sweep import SweepRun, sweep

__all__ = [
    "NeighborGraph",
    "knn_exact",
    "cross_knn",
    "FuzzyGraph",
    "calibrate_fuzzy",
    "smooth_knn_calibration",
    "fit_ab",
    "layout_sgd",
    "spectral_init",
    "PcaModel",
    "pca_fit",
    "pca_transform",
    "EmbeddingModel",
    "umap_fit",
    "umap_transform",
    "SweepRun",
    "sweep",
]
