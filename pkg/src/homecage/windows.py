"""Behavioral window extraction and dataset assembly.

A window is omega consecutive frames of a normalized clean series flattened
frame-major: frame t contributes [x_1, y_1, ..., x_f, y_f] before frame t+1.
Datasets persist as raw float32 plus a provenance index so any matrix row
can be traced back to (video, start frame).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .series import CleanSeries

DEFAULT_OMEGA = 60
DEFAULT_STRIDE = 1

MATRIX_FILE = "windows.f32"
INDEX_FILE = "windows.index.csv"
META_FILE = "windows.meta.json"


@dataclass
class BehaviorWindow:
    window_id: int
    video_id: str
    start_frame: int
    vector: np.ndarray  # omega * 2f float32, frame-major


@dataclass
class WindowDataset:
    """Stacked behavior windows with provenance."""

    matrix: np.ndarray  # (N, omega * 2f) float32
    index: list[tuple[str, int]]  # row -> (video_id, start_frame)
    omega: int
    stride: int
    n_parts: int
    bodyparts: list[str]

    @property
    def n_windows(self) -> int:
        return self.matrix.shape[0]

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        matrix = np.ascontiguousarray(self.matrix, dtype="<f4")
        matrix.tofile(directory / MATRIX_FILE)
        with open(directory / INDEX_FILE, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["window_id", "video_id", "start_frame"])
            for i, (video_id, start) in enumerate(self.index):
                writer.writerow([i, video_id, start])
        meta = {
            "omega": self.omega,
            "stride": self.stride,
            "n_parts": self.n_parts,
            "bodyparts": self.bodyparts,
            "n_windows": self.n_windows,
        }
        with open(directory / META_FILE, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, directory: str | Path) -> "WindowDataset":
        directory = Path(directory)
        with open(directory / META_FILE, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
        matrix = np.fromfile(directory / MATRIX_FILE, dtype="<f4")
        dim = meta["omega"] * 2 * meta["n_parts"]
        matrix = matrix.reshape(meta["n_windows"], dim)
        index: list[tuple[str, int]] = []
        with open(directory / INDEX_FILE, "r", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            next(reader)
            for row in reader:
                index.append((row[1], int(row[2])))
        return cls(
            matrix=matrix,
            index=index,
            omega=meta["omega"],
            stride=meta["stride"],
            n_parts=meta["n_parts"],
            bodyparts=list(meta["bodyparts"]),
        )


def window_count(n_frames: int, omega: int, stride: int) -> int:
    """max(0, floor((n - omega) / s) + 1)."""
    return max(0, (n_frames - omega) // stride + 1)


def make_windows(
    series: CleanSeries, omega: int = DEFAULT_OMEGA, stride: int = DEFAULT_STRIDE
) -> list[BehaviorWindow]:
    """Slice one clean series into flattened windows; short videos yield none."""
    if omega < 1 or stride < 1:
        raise ValueError("omega and stride must be >= 1")
    n = series.n_frames
    windows = []
    for w, start in enumerate(range(0, n - omega + 1, stride)):
        vector = series.positions[start : start + omega].reshape(-1).astype(np.float32)
        windows.append(
            BehaviorWindow(
                window_id=w,
                video_id=series.video_id,
                start_frame=series.start_frame + start,
                vector=vector,
            )
        )
    return windows


def build_dataset(
    videos: list[CleanSeries],
    omega: int = DEFAULT_OMEGA,
    stride: int = DEFAULT_STRIDE,
    cap: int | None = None,
    seed: int = 0,
) -> WindowDataset:
    """Concatenate windows from all videos, optionally subsampling to ``cap``.

    The subsample is uniform without replacement, driven by ``seed``, and
    keeps rows in ascending original order so provenance stays stable.
    """
    if not videos:
        raise ValueError("no input videos")
    bodyparts = videos[0].bodyparts
    for v in videos[1:]:
        if v.bodyparts != bodyparts:
            raise ValueError(
                f"bodypart mismatch: {v.video_id} has {v.bodyparts}, expected {bodyparts}"
            )

    vectors: list[np.ndarray] = []
    index: list[tuple[str, int]] = []
    for video in videos:
        for w in make_windows(video, omega, stride):
            vectors.append(w.vector)
            index.append((w.video_id, w.start_frame))

    if vectors:
        matrix = np.stack(vectors)
    else:
        matrix = np.empty((0, omega * 2 * len(bodyparts)), dtype=np.float32)

    if cap is not None and cap < matrix.shape[0]:
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(matrix.shape[0], size=cap, replace=False))
        matrix = matrix[keep]
        index = [index[i] for i in keep]

    return WindowDataset(
        matrix=matrix,
        index=index,
        omega=omega,
        stride=stride,
        n_parts=len(bodyparts),
        bodyparts=list(bodyparts),
    )
