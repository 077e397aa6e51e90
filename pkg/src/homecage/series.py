"""Differential smoothing, interpolation, and centroid normalization.

A single-bodypart track is a (frames, 2) float array with NaN rows marking
MISSING observations.  Smoothing removes implausible jumps by comparing each
frame against its raw predecessor; interpolation (linear or natural cubic
spline) then fills every gap, and per-frame centroid subtraction makes the
result spatially independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import PoseSeries

DEFAULT_DMAX = 10.0


class DegenerateTrackError(ValueError):
    """Raised when a track has too few observations to interpolate."""


@dataclass
class CleanSeries:
    """Gap-free per-frame positions for every bodypart of one video.

    ``start_frame`` anchors row 0 in source-video frame coordinates, so
    windows cut from a segment keep globally resolvable provenance.
    """

    video_id: str
    bodyparts: list[str]
    positions: np.ndarray  # (frames, parts, 2), no NaN
    normalized: bool = False
    start_frame: int = 0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64)
        if np.isnan(self.positions).any():
            raise ValueError("CleanSeries must not contain NaN")
        if self.positions.ndim != 3 or self.positions.shape[2] != 2:
            raise ValueError("positions must be (frames, parts, 2)")
        if self.positions.shape[1] != len(self.bodyparts):
            raise ValueError("bodypart count mismatch")

    @property
    def n_frames(self) -> int:
        return self.positions.shape[0]


def observed_mask(track: np.ndarray) -> np.ndarray:
    """True where both coordinates of a (frames, 2) track are present."""
    return ~np.isnan(track).any(axis=1)


def differential_smooth(track: np.ndarray, d_max: float = DEFAULT_DMAX) -> np.ndarray:
    """Mark frames whose displacement from the raw predecessor exceeds d_max.

    The comparison always uses the raw value at t-1, not the smoothed one, so
    one genuine leap cannot cascade into unbounded deletion.  Frames whose
    predecessor is MISSING are kept.
    """
    track = np.asarray(track, dtype=np.float64)
    out = track.copy()
    observed = observed_mask(track)
    if track.shape[0] < 2:
        return out
    step = np.hypot(np.diff(track[:, 0]), np.diff(track[:, 1]))
    both = observed[:-1] & observed[1:]
    with np.errstate(invalid="ignore"):
        spike = both & (step > d_max)
    out[1:][spike] = np.nan
    return out


def interpolate_linear(track: np.ndarray) -> np.ndarray:
    """Straight-line fill of interior gaps; constant fill at the ends."""
    track = np.asarray(track, dtype=np.float64)
    observed = observed_mask(track)
    if not observed.any():
        raise DegenerateTrackError("track has no observed samples")
    frames = np.arange(track.shape[0], dtype=np.float64)
    knots = frames[observed]
    out = np.empty_like(track)
    for c in range(2):
        out[:, c] = np.interp(frames, knots, track[observed, c])
    return out


def natural_spline_second_derivatives(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second derivatives of the natural cubic spline through (x, y) knots.

    Solves the standard tridiagonal system with the Thomas algorithm; the
    boundary second derivatives are zero.
    """
    n = len(x)
    if n < 3:
        return np.zeros(n)
    h = np.diff(x)
    # Interior equations: h[i-1] m[i-1] + 2(h[i-1]+h[i]) m[i] + h[i] m[i+1] = rhs
    diag = 2.0 * (h[:-1] + h[1:])
    lower = h[:-1].copy()
    upper = h[1:].copy()
    rhs = 6.0 * ((y[2:] - y[1:-1]) / h[1:] - (y[1:-1] - y[:-2]) / h[:-1])

    # Thomas forward sweep on the (n-2)-sized interior system.
    m_interior = np.zeros(n - 2)
    for i in range(1, n - 2):
        w = lower[i] / diag[i - 1]
        diag[i] -= w * upper[i - 1]
        rhs[i] -= w * rhs[i - 1]
    m_interior[-1] = rhs[-1] / diag[-1]
    for i in range(n - 4, -1, -1):
        m_interior[i] = (rhs[i] - upper[i] * m_interior[i + 1]) / diag[i]

    m = np.zeros(n)
    m[1:-1] = m_interior
    return m


def evaluate_natural_spline(
    x: np.ndarray, y: np.ndarray, m: np.ndarray, query: np.ndarray
) -> np.ndarray:
    """Piecewise-cubic evaluation with constant extension beyond the end knots."""
    query = np.asarray(query, dtype=np.float64)
    out = np.empty_like(query)
    idx = np.clip(np.searchsorted(x, query, side="right") - 1, 0, len(x) - 2)
    x0, x1 = x[idx], x[idx + 1]
    h = x1 - x0
    a = (x1 - query) / h
    b = (query - x0) / h
    out = (
        a * y[idx]
        + b * y[idx + 1]
        + ((a**3 - a) * m[idx] + (b**3 - b) * m[idx + 1]) * h**2 / 6.0
    )
    out[query <= x[0]] = y[0]
    out[query >= x[-1]] = y[-1]
    return out


def interpolate_cubic(track: np.ndarray) -> np.ndarray:
    """Natural-cubic-spline fill of gaps; constant fill beyond the end knots.

    Falls back to constant fill when only one sample is observed; raises
    on a fully missing track.
    """
    track = np.asarray(track, dtype=np.float64)
    observed = observed_mask(track)
    n_obs = int(observed.sum())
    if n_obs == 0:
        raise DegenerateTrackError("track has no observed samples")
    frames = np.arange(track.shape[0], dtype=np.float64)
    if n_obs == 1:
        return np.tile(track[observed][0], (track.shape[0], 1))
    knots = frames[observed]
    out = np.empty_like(track)
    for c in range(2):
        values = track[observed, c]
        m = natural_spline_second_derivatives(knots, values)
        out[:, c] = evaluate_natural_spline(knots, values, m, frames)
        out[observed, c] = values  # knots reproduced exactly, no roundoff
    return out


@dataclass
class DisplacementHistogram:
    """Consecutive-observed-pair displacement counts across tracks."""

    bin_edges: np.ndarray
    counts: np.ndarray
    fraction_within: float  # pooled fraction of pairs with step <= d_max
    per_track_fraction: list[float]
    total_pairs: int


def displacement_histogram(
    tracks: list[np.ndarray], bin_width: float = 1.0, d_max: float = DEFAULT_DMAX
) -> DisplacementHistogram:
    """Histogram of displacements between contiguous observed frames.

    Reports the kept fraction both pooled across tracks and per track, since
    either convention may be wanted downstream.
    """
    steps_per_track: list[np.ndarray] = []
    for track in tracks:
        track = np.asarray(track, dtype=np.float64)
        observed = observed_mask(track)
        if track.shape[0] < 2:
            steps_per_track.append(np.empty(0))
            continue
        step = np.hypot(np.diff(track[:, 0]), np.diff(track[:, 1]))
        both = observed[:-1] & observed[1:]
        steps_per_track.append(step[both])

    pooled = np.concatenate(steps_per_track) if steps_per_track else np.empty(0)
    if pooled.size == 0:
        return DisplacementHistogram(
            bin_edges=np.array([0.0]), counts=np.array([], dtype=np.int64),
            fraction_within=0.0, per_track_fraction=[], total_pairs=0,
        )
    n_bins = int(np.floor(pooled.max() / bin_width)) + 1
    edges = np.arange(n_bins + 1) * bin_width
    counts, _ = np.histogram(pooled, bins=edges)
    return DisplacementHistogram(
        bin_edges=edges,
        counts=counts.astype(np.int64),
        fraction_within=float((pooled <= d_max).mean()),
        per_track_fraction=[
            float((s <= d_max).mean()) if s.size else 0.0 for s in steps_per_track
        ],
        total_pairs=int(pooled.size),
    )


def centroid_normalize(series: CleanSeries, parts: list[str] | None = None) -> CleanSeries:
    """Subtract the per-frame centroid of the given parts from every part."""
    part_names = parts if parts is not None else series.bodyparts
    if not part_names:
        raise ValueError("parts must be non-empty")
    cols = [series.bodyparts.index(p) for p in part_names]
    centroid = series.positions[:, cols, :].mean(axis=1, keepdims=True)
    return CleanSeries(
        video_id=series.video_id,
        bodyparts=list(series.bodyparts),
        positions=series.positions - centroid,
        normalized=True,
        start_frame=series.start_frame,
    )


def clean_pose(
    pose: PoseSeries,
    d_max: float = DEFAULT_DMAX,
    interp: str = "cubic",
    smooth: bool = True,
    normalize: bool = True,
) -> CleanSeries:
    """Standard cleaning pass: smooth, interpolate, centroid-normalize.

    The input is expected to be likelihood-masked already.  Raises
    DegenerateTrackError if any bodypart has fewer than 2 observations
    after smoothing, in which case the whole video should be rejected.
    """
    if interp not in ("cubic", "linear"):
        raise ValueError(f"unknown interpolation {interp!r}")
    fill = interpolate_cubic if interp == "cubic" else interpolate_linear
    columns = []
    for p in range(len(pose.bodyparts)):
        track = pose.xy[:, p, :]
        if smooth:
            track = differential_smooth(track, d_max)
        if observed_mask(track).sum() < 2:
            raise DegenerateTrackError(
                f"bodypart {pose.bodyparts[p]!r} has fewer than 2 usable samples"
            )
        columns.append(fill(track))
    clean = CleanSeries(
        video_id=pose.video_id,
        bodyparts=list(pose.bodyparts),
        positions=np.stack(columns, axis=1),
        start_frame=int(pose.frame_index[0]),
    )
    return centroid_normalize(clean) if normalize else clean


def clean_series_csv(series: CleanSeries) -> str:
    """One row per frame: leading source-frame index, then `<part>_x,<part>_y`."""
    header = ["frame"] + [f"{p}_{c}" for p in series.bodyparts for c in ("x", "y")]
    lines = [",".join(header)]
    flat = series.positions.reshape(series.n_frames, -1)
    for i, row in enumerate(flat):
        cells = [str(series.start_frame + i)]
        cells += [repr(float(v)) for v in row]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def parse_clean_series_csv(text: str, video_id: str) -> CleanSeries:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split(",")
    if header[0] != "frame" or (len(header) - 1) % 2 != 0:
        raise ValueError("clean series header must be frame,<part>_x,<part>_y,...")
    bodyparts = [header[i][: -len("_x")] for i in range(1, len(header), 2)]
    rows = [[float(c) for c in ln.split(",")] for ln in lines[1:]]
    data = np.array(rows)
    positions = data[:, 1:].reshape(len(rows), len(bodyparts), 2)
    start = int(data[0, 0]) if len(rows) else 0
    return CleanSeries(
        video_id=video_id, bodyparts=bodyparts, positions=positions,
        normalized=True, start_frame=start,
    )
