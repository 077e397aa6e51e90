"""Stochastic graph layout.

Edges of the fuzzy graph are sampled proportionally to their weight and pull
their endpoints together along the fitted (a, b) similarity curve; negative
samples push random points apart.  Per-coordinate gradient terms are clipped
to +/-4 and the learning rate decays linearly to zero.

The single-worker kernel is deterministic for a fixed seed.  The optional
parallel kernel races updates between threads (like any asynchronous SGD)
and is excluded from golden tests.
"""

from __future__ import annotations

import numba
import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .fuzzy import FuzzyGraph

GRAD_CLIP = 4.0
NOISE_SCALE = 1e-4
INIT_RANGE = 10.0
POWER_ITERS = 1000
POWER_TOL = 1e-7


def make_epochs_per_sample(weights: np.ndarray, n_epochs: int) -> np.ndarray:
    """Epochs between samples of each edge: heavy edges sample every epoch."""
    weights = np.asarray(weights, dtype=np.float64)
    result = np.full(weights.shape[0], -1.0)
    n_samples = n_epochs * (weights / weights.max())
    result[n_samples > 0] = float(n_epochs) / n_samples[n_samples > 0]
    return result


def _epoch_body(
    head_emb,
    tail_emb,
    head,
    tail,
    epochs_per_sample,
    epoch_of_next_sample,
    epochs_per_negative_sample,
    epoch_of_next_negative_sample,
    a,
    b,
    gamma,
    alpha,
    move_other,
    epoch,
    rng_state,
    n_vertices,
):
    dim = head_emb.shape[1]
    for i in numba.prange(epochs_per_sample.shape[0]):
        if epoch_of_next_sample[i] > epoch:
            continue
        j = head[i]
        k = tail[i]
        current = head_emb[j]
        other = tail_emb[k]

        dist_squared = 0.0
        for d in range(dim):
            diff = current[d] - other[d]
            dist_squared += diff * diff

        if dist_squared > 0.0:
            grad_coeff = -2.0 * a * b * dist_squared ** (b - 1.0)
            grad_coeff /= a * dist_squared**b + 1.0
        else:
            grad_coeff = 0.0

        for d in range(dim):
            grad_d = grad_coeff * (current[d] - other[d])
            if grad_d > GRAD_CLIP:
                grad_d = GRAD_CLIP
            elif grad_d < -GRAD_CLIP:
                grad_d = -GRAD_CLIP
            current[d] += grad_d * alpha
            if move_other:
                other[d] -= grad_d * alpha

        epoch_of_next_sample[i] += epochs_per_sample[i]

        n_neg = int(
            (epoch - epoch_of_next_negative_sample[i]) / epochs_per_negative_sample[i]
        )
        for _ in range(n_neg):
            rng_state[0] ^= rng_state[0] >> np.uint64(12)
            rng_state[0] ^= rng_state[0] << np.uint64(25)
            rng_state[0] ^= rng_state[0] >> np.uint64(27)
            draw = rng_state[0] * np.uint64(2685821657736338717)
            k = np.int64(draw % n_vertices)

            other = tail_emb[k]
            dist_squared = 0.0
            for d in range(dim):
                diff = current[d] - other[d]
                dist_squared += diff * diff

            if dist_squared > 0.0:
                grad_coeff = 2.0 * gamma * b
                grad_coeff /= (0.001 + dist_squared) * (a * dist_squared**b + 1.0)
            elif j == k:
                continue
            else:
                grad_coeff = 0.0

            for d in range(dim):
                if grad_coeff > 0.0:
                    grad_d = grad_coeff * (current[d] - other[d])
                    if grad_d > GRAD_CLIP:
                        grad_d = GRAD_CLIP
                    elif grad_d < -GRAD_CLIP:
                        grad_d = -GRAD_CLIP
                else:
                    grad_d = GRAD_CLIP
                current[d] += grad_d * alpha

        epoch_of_next_negative_sample[i] += n_neg * epochs_per_negative_sample[i]


_epoch_single = numba.njit(_epoch_body, cache=True)
_epoch_parallel = numba.njit(_epoch_body, parallel=True)


def run_sgd(
    head_emb: np.ndarray,
    tail_emb: np.ndarray,
    head: np.ndarray,
    tail: np.ndarray,
    weights: np.ndarray,
    a: float,
    b: float,
    epochs: int,
    seed: int,
    negative_rate: int,
    lr0: float,
    move_other: bool,
    gamma: float = 1.0,
    parallel: bool = False,
) -> None:
    epochs_per_sample = make_epochs_per_sample(weights, epochs)
    epoch_of_next_sample = epochs_per_sample.copy()
    epochs_per_negative_sample = epochs_per_sample / negative_rate
    epoch_of_next_negative_sample = epochs_per_negative_sample.copy()
    rng_state = np.array(
        [np.uint64((seed * 2654435761 + 1) & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64
    )
    n_vertices = np.uint64(tail_emb.shape[0])
    kernel = _epoch_parallel if parallel else _epoch_single

    for epoch in range(epochs):
        alpha = lr0 * (1.0 - epoch / float(epochs))
        kernel(
            head_emb,
            tail_emb,
            head,
            tail,
            epochs_per_sample,
            epoch_of_next_sample,
            epochs_per_negative_sample,
            epoch_of_next_negative_sample,
            a,
            b,
            gamma,
            alpha,
            move_other,
            epoch,
            rng_state,
            n_vertices,
        )

    if not np.isfinite(head_emb).all():
        raise FloatingPointError("layout produced non-finite coordinates")


def _noisy_scale(coords: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Rescale to +/-INIT_RANGE and add a whisper of noise to break ties."""
    peak = np.abs(coords).max()
    if peak > 0:
        coords = coords * (INIT_RANGE / peak)
    return coords + rng.normal(scale=NOISE_SCALE, size=coords.shape)


def _component_blocked_init(
    labels: np.ndarray, n_components: int, dims: int, rng: np.random.Generator
) -> np.ndarray:
    """Seeded random coordinates in [-10, 10]^dims, one grid cell per component.

    Disconnected components share no attractive edges, so nothing but this
    initial offset keeps them from interleaving; blocking them into disjoint
    cells lets negative sampling hold them apart.
    """
    grid = int(np.ceil(n_components ** (1.0 / dims)))
    half_cell = INIT_RANGE / grid
    centers_1d = -INIT_RANGE + half_cell * (2.0 * np.arange(grid) + 1.0)
    coords = np.empty((labels.shape[0], dims))
    for component in range(n_components):
        cell = np.empty(dims)
        index = component
        for d in range(dims):
            cell[d] = centers_1d[index % grid]
            index //= grid
        members = labels == component
        coords[members] = cell + rng.uniform(
            -0.8 * half_cell, 0.8 * half_cell, size=(int(members.sum()), dims)
        )
    return coords


def spectral_init(fuzzy: FuzzyGraph, dims: int = 2, seed: int = 0) -> np.ndarray:
    """Leading non-trivial eigenvectors of the normalized adjacency.

    Power iteration with deflation against the known trivial eigenvector.
    Disconnected graphs degenerate the spectral problem, so they fall back
    to seeded random coordinates in [-10, 10]^dims with each component
    confined to its own grid cell.
    """
    rng = np.random.default_rng(seed)
    n = fuzzy.n_points
    w = fuzzy.matrix()
    n_components, labels = connected_components(w, directed=False)
    if n <= dims:
        return rng.uniform(-INIT_RANGE, INIT_RANGE, size=(n, dims))
    if n_components > 1:
        return _component_blocked_init(labels, n_components, dims, rng)

    degree = np.asarray(w.sum(axis=1)).ravel()
    inv_sqrt = 1.0 / np.sqrt(degree)
    scale = sp.diags(inv_sqrt)
    m = scale @ w @ scale  # normalized adjacency, eigenvalues in [-1, 1]

    trivial = np.sqrt(degree)
    trivial /= np.linalg.norm(trivial)
    basis = [trivial]

    vectors = []
    for _ in range(dims):
        v = rng.normal(size=n)
        for u in basis:
            v -= (v @ u) * u
        v /= np.linalg.norm(v)
        for _ in range(POWER_ITERS):
            # B = I + M keeps the spectrum positive so power iteration
            # converges to the largest remaining eigenvalue.
            nv = v + m @ v
            for u in basis:
                nv -= (nv @ u) * u
            norm = np.linalg.norm(nv)
            if norm == 0.0:
                nv = rng.normal(size=n)
                nv /= np.linalg.norm(nv)
                v = nv
                continue
            nv /= norm
            if np.linalg.norm(nv - v) < POWER_TOL:
                v = nv
                break
            v = nv
        basis.append(v)
        vectors.append(v)

    coords = np.stack(vectors, axis=1)
    return _noisy_scale(coords, rng)


def layout_sgd(
    fuzzy: FuzzyGraph,
    a: float,
    b: float,
    dims: int = 2,
    epochs: int = 500,
    seed: int = 0,
    init: str | np.ndarray = "spectral",
    negative_rate: int = 5,
    lr0: float = 1.0,
    parallel: bool = False,
) -> np.ndarray:
    """Optimize 2-D (or n-D) coordinates for a calibrated fuzzy graph."""
    if isinstance(init, np.ndarray):
        coords = np.array(init, dtype=np.float32)
        if coords.shape != (fuzzy.n_points, dims):
            raise ValueError("init array has the wrong shape")
    elif init == "spectral":
        coords = spectral_init(fuzzy, dims=dims, seed=seed).astype(np.float32)
    elif init == "random":
        rng = np.random.default_rng(seed)
        coords = rng.uniform(-INIT_RANGE, INIT_RANGE, size=(fuzzy.n_points, dims)).astype(
            np.float32
        )
    else:
        raise ValueError(f"unknown init {init!r}")

    run_sgd(
        head_emb=coords,
        tail_emb=coords,
        head=fuzzy.rows.astype(np.int64),
        tail=fuzzy.cols.astype(np.int64),
        weights=fuzzy.weights,
        a=a,
        b=b,
        epochs=epochs,
        seed=seed,
        negative_rate=negative_rate,
        lr0=lr0,
        move_other=True,
        parallel=parallel,
    )
    return coords
