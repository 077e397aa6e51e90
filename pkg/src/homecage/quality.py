"""Likelihood masking and geometric-mean video selection.

Per-video quality is the geometric mean of per-bodypart mean likelihoods,
computed on the raw (unmasked) series; masking only affects the positions
passed downstream.  MISSING likelihoods count as zero confidence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import PoseSeries

DEFAULT_TAU = 0.5
DEFAULT_GEOMEAN_THRESHOLD = 0.3
DEFAULT_PARTS = ["leftear", "rightear", "snout", "lefthand", "righthand"]

THRESHOLD_GRID = np.linspace(0.0, 1.0, 21)  # [0, 1] step 0.05


@dataclass
class QualityReport:
    video_id: str
    part_means: dict[str, float]
    geomean: float
    missing_fraction_after_mask: float


@dataclass
class SelectionTradeoff:
    """Kept-fraction and residual-missing curves over a threshold grid."""

    thresholds: np.ndarray
    kept_fraction: np.ndarray
    mean_missing_fraction: np.ndarray
    max_missing_fraction: np.ndarray


def mask_low_likelihood(pose: PoseSeries, tau: float = DEFAULT_TAU) -> PoseSeries:
    """Samples with likelihood below tau become MISSING; others pass through."""
    with np.errstate(invalid="ignore"):
        drop = pose.likelihood < tau  # NaN compares False: already-missing stays put
    xy = pose.xy.copy()
    likelihood = pose.likelihood.copy()
    xy[drop] = np.nan
    likelihood[drop] = np.nan
    return PoseSeries(
        video_id=pose.video_id,
        bodyparts=list(pose.bodyparts),
        xy=xy,
        likelihood=likelihood,
        scorer=pose.scorer,
        frame_index=pose.frame_index.copy(),
    )


def bodypart_quality(pose: PoseSeries, part: str) -> float:
    """Mean raw likelihood for one bodypart; MISSING contributes 0."""
    column = pose.likelihood[:, pose.part_index(part)]
    return float(np.nan_to_num(column, nan=0.0).mean())


def geomean_quality(pose: PoseSeries, parts: list[str]) -> float:
    """Geometric mean of per-part mean likelihoods; 0 if any factor is 0."""
    if not parts:
        raise ValueError("parts must be non-empty")
    means = np.array([bodypart_quality(pose, p) for p in parts])
    if np.any(means == 0.0):
        return 0.0
    return float(np.prod(means) ** (1.0 / len(means)))


def compute_report(
    pose: PoseSeries, parts: list[str] | None = None, tau: float = DEFAULT_TAU
) -> QualityReport:
    """Per-video quality summary over the configured parts."""
    parts = list(parts) if parts else [p for p in DEFAULT_PARTS if p in pose.bodyparts]
    if not parts:
        parts = list(pose.bodyparts)
    part_means = {p: bodypart_quality(pose, p) for p in parts}
    masked = mask_low_likelihood(pose, tau)
    cols = [masked.part_index(p) for p in parts]
    missing = masked.missing_mask()[:, cols]
    return QualityReport(
        video_id=pose.video_id,
        part_means=part_means,
        geomean=geomean_quality(pose, parts),
        missing_fraction_after_mask=float(missing.mean()),
    )


def select_videos(
    reports: list[QualityReport], threshold: float = DEFAULT_GEOMEAN_THRESHOLD
) -> tuple[list[str], SelectionTradeoff]:
    """Videos whose geomean reaches the threshold (inclusive), plus the tradeoff curve."""
    if not (0.0 <= threshold <= 1.0):
        raise ValueError("geomean threshold must be in [0, 1]")
    geomeans = np.array([r.geomean for r in reports])
    missing = np.array([r.missing_fraction_after_mask for r in reports])
    selected = [r.video_id for r in reports if r.geomean >= threshold]

    kept, mean_missing, max_missing = [], [], []
    for t in THRESHOLD_GRID:
        mask = geomeans >= t
        kept.append(mask.mean() if len(reports) else 0.0)
        if mask.any():
            mean_missing.append(float(missing[mask].mean()))
            max_missing.append(float(missing[mask].max()))
        else:
            mean_missing.append(0.0)
            max_missing.append(0.0)

    tradeoff = SelectionTradeoff(
        thresholds=THRESHOLD_GRID.copy(),
        kept_fraction=np.array(kept),
        mean_missing_fraction=np.array(mean_missing),
        max_missing_fraction=np.array(max_missing),
    )
    return selected, tradeoff


def report_csv(reports: list[QualityReport], parts: list[str]) -> str:
    """Render reports as `video_id,<part>_mean...,geomean,missing_fraction`."""
    header = ["video_id"] + [f"{p}_mean" for p in parts] + ["geomean", "missing_fraction"]
    lines = [",".join(header)]
    for r in reports:
        cells = [r.video_id]
        cells += [repr(float(r.part_means.get(p, 0.0))) for p in parts]
        cells += [repr(float(r.geomean)), repr(float(r.missing_fraction_after_mask))]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
