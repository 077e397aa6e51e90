"""Region queries over the embedding, label persistence, and edge-ensemble
rendering of stereotyped behavior.

Ensembles average binary edge maps over every window in a selected region,
per window offset, in full-frame coordinates: static background edges
survive at full intensity while inconsistent pixels wash toward zero.
"""

from __future__ import annotations

import json
import logging
import math
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np
from PIL import Image
from scipy import ndimage

from .embed.projection import EmbeddingModel
from .ingest import FrameStack

logger = logging.getLogger(__name__)

DEFAULT_CANNY_LOW = 50.0
DEFAULT_CANNY_HIGH = 150.0
DEFAULT_BLUR_SIGMA = 1.4


class RegionError(ValueError):
    """Raised for malformed query regions."""


@dataclass(frozen=True)
class RectRegion:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise RegionError(f"degenerate rectangle {self}")

    def contains(self, points: np.ndarray) -> np.ndarray:
        x, y = points[:, 0], points[:, 1]
        return (x >= self.x_min) & (x <= self.x_max) & (y >= self.y_min) & (y <= self.y_max)

    def to_json(self) -> dict:
        return {"rect": [self.x_min, self.x_max, self.y_min, self.y_max]}


@dataclass(frozen=True)
class DiscRegion:
    cx: float
    cy: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise RegionError(f"disc radius must be positive, got {self.radius}")

    def contains(self, points: np.ndarray) -> np.ndarray:
        dx = points[:, 0] - self.cx
        dy = points[:, 1] - self.cy
        return dx * dx + dy * dy <= self.radius * self.radius

    def to_json(self) -> dict:
        return {"disc": [self.cx, self.cy, self.radius]}


Region = RectRegion | DiscRegion


def region_from_json(payload: dict) -> Region:
    """Parse `{"rect":[x0,x1,y0,y1]}` or `{"disc":[cx,cy,r]}`."""
    if "rect" in payload:
        values = payload["rect"]
        if not isinstance(values, (list, tuple)) or len(values) != 4:
            raise RegionError("rect must be [x_min, x_max, y_min, y_max]")
        return RectRegion(*[float(v) for v in values])
    if "disc" in payload:
        values = payload["disc"]
        if not isinstance(values, (list, tuple)) or len(values) != 3:
            raise RegionError("disc must be [cx, cy, radius]")
        return DiscRegion(*[float(v) for v in values])
    raise RegionError("region must carry a 'rect' or 'disc' key")


def query_region(model: EmbeddingModel, region: Region) -> tuple[np.ndarray, dict[str, int]]:
    """Window ids inside the region plus member counts grouped by video."""
    mask = region.contains(np.asarray(model.coordinates, dtype=np.float64))
    ids = np.flatnonzero(mask)
    counts: dict[str, int] = {}
    for i in ids:
        video_id = model.index[int(i)][0]
        counts[video_id] = counts.get(video_id, 0) + 1
    return ids, counts


# ---------------------------------------------------------------------------
# Cluster labels
# ---------------------------------------------------------------------------


@dataclass
class ClusterLabel:
    label_id: int
    region: Region
    text: str
    author: str
    created_at: str

    def to_json(self) -> dict:
        return {
            "id": self.label_id,
            "region": self.region.to_json(),
            "text": self.text,
            "author": self.author,
            "created_at": self.created_at,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "ClusterLabel":
        return cls(
            label_id=int(payload["id"]),
            region=region_from_json(payload["region"]),
            text=str(payload["text"]),
            author=str(payload.get("author", "")),
            created_at=str(payload.get("created_at", "")),
        )


class LabelStore:
    """Cluster labels in a single JSON document with atomic replace-on-write.

    One writer at a time; reads serve from memory after the initial load.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._labels: list[ClusterLabel] = []
        self._next_id = 1
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        self._labels = [ClusterLabel.from_json(rec) for rec in payload.get("labels", [])]
        if self._labels:
            self._next_id = max(l.label_id for l in self._labels) + 1

    def _flush(self) -> None:
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump({"labels": [l.to_json() for l in self._labels]}, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, self.path)

    def add(self, region: Region, text: str, author: str = "") -> int:
        with self._lock:
            label = ClusterLabel(
                label_id=self._next_id,
                region=region,
                text=text,
                author=author,
                created_at=datetime.now(timezone.utc).isoformat(),
            )
            self._next_id += 1
            self._labels.append(label)
            self._flush()
            return label.label_id

    def list(self) -> list[ClusterLabel]:
        with self._lock:
            return list(self._labels)

    def get(self, label_id: int) -> ClusterLabel | None:
        with self._lock:
            for label in self._labels:
                if label.label_id == label_id:
                    return label
        return None

    def delete(self, label_id: int) -> bool:
        """Remove a label; deleting an absent id is a successful no-op."""
        with self._lock:
            before = len(self._labels)
            self._labels = [l for l in self._labels if l.label_id != label_id]
            changed = len(self._labels) != before
            if changed:
                self._flush()
            return changed


# ---------------------------------------------------------------------------
# Edge detection
# ---------------------------------------------------------------------------


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = int(math.ceil(3.0 * sigma))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(xs**2) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.float64)


def _correlate2d(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Reflect-padded 2-D correlation; gradient sign is irrelevant downstream."""
    return ndimage.correlate(image, kernel, mode="reflect")


def _non_maximum_suppression(magnitude: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Thin ridges to one pixel along the quantized gradient direction.

    Equal-magnitude plateaus keep their first pixel (strict test backward,
    permissive forward), so a symmetric two-column step yields one column.
    """
    h, w = magnitude.shape
    padded = np.pad(magnitude, 1, mode="constant")

    # Quantize direction to 4 bins over [0, pi): 0, 45, 90, 135 degrees.
    angle = np.mod(direction, math.pi)
    bins = np.floor((angle + math.pi / 8.0) / (math.pi / 4.0)).astype(np.int64) % 4
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}  # (dy, dx) per bin

    keep = np.zeros_like(magnitude, dtype=bool)
    ys, xs = np.mgrid[0:h, 0:w]
    for b, (dy, dx) in offsets.items():
        sel = bins == b
        ahead = padded[ys[sel] + 1 + dy, xs[sel] + 1 + dx]
        behind = padded[ys[sel] + 1 - dy, xs[sel] + 1 - dx]
        mag = magnitude[sel]
        keep[sel] = (mag > 0) & (mag >= ahead) & (mag > behind)
    return np.where(keep, magnitude, 0.0)


def canny(
    frame: np.ndarray,
    low: float = DEFAULT_CANNY_LOW,
    high: float = DEFAULT_CANNY_HIGH,
    blur_sigma: float = DEFAULT_BLUR_SIGMA,
) -> np.ndarray:
    """Binary edge map of a grayscale frame.

    Gaussian blur, Sobel gradients, non-maximum suppression, then
    double-threshold hysteresis: strong pixels (>= high) seed, weak pixels
    (>= low) survive when 8-connected to a strong one.
    """
    if not (0 <= low <= high):
        raise ValueError(f"need 0 <= low <= high, got low={low} high={high}")
    image = np.asarray(frame, dtype=np.float64)
    if image.size == 0:
        raise ValueError("empty image")

    if blur_sigma > 0:
        kernel = _gaussian_kernel(blur_sigma)
        image = ndimage.correlate1d(image, kernel, axis=0, mode="reflect")
        image = ndimage.correlate1d(image, kernel, axis=1, mode="reflect")

    gx = _correlate2d(image, SOBEL_X)
    gy = _correlate2d(image, SOBEL_Y)
    magnitude = np.hypot(gx, gy)
    direction = np.arctan2(gy, gx)

    thin = _non_maximum_suppression(magnitude, direction)

    strong = thin >= high
    weak = thin >= low
    if not strong.any():
        return np.zeros_like(image)
    eight = np.ones((3, 3), dtype=bool)
    components, _ = ndimage.label(weak, structure=eight)
    alive = np.unique(components[strong])
    edges = np.isin(components, alive) & weak
    return edges.astype(np.float64)


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------


@dataclass
class EnsembleClip:
    """Per-offset mean edge maps over the contributing windows."""

    frames: np.ndarray  # (omega, h, w) float in [0, 1]
    window_count: int
    region: Region | None = None
    canny_low: float = DEFAULT_CANNY_LOW
    canny_high: float = DEFAULT_CANNY_HIGH
    blur_sigma: float = DEFAULT_BLUR_SIGMA

    def __len__(self) -> int:
        return self.frames.shape[0]


FrameSource = Callable[[str], FrameStack | None]


def ensemble(
    window_refs: list[tuple[str, int]],
    frames_source: FrameSource,
    omega: int,
    low: float = DEFAULT_CANNY_LOW,
    high: float = DEFAULT_CANNY_HIGH,
    blur_sigma: float = DEFAULT_BLUR_SIGMA,
    region: Region | None = None,
) -> EnsembleClip:
    """Average per-offset edge maps over windows; normalize by the clip max.

    ``window_refs`` are (video_id, start_frame) pairs; frames must be the
    original full camera frames so background edges align.  Windows whose
    frames are missing are skipped with a warning.
    """
    if not window_refs:
        raise ValueError("ensemble needs at least one window")

    edge_cache: dict[tuple[str, int], np.ndarray] = {}
    stacks: dict[str, FrameStack | None] = {}
    total: np.ndarray | None = None
    used = 0

    for video_id, start in window_refs:
        if video_id not in stacks:
            stacks[video_id] = frames_source(video_id)
        stack = stacks[video_id]
        if stack is None or start < 0 or start + omega > len(stack):
            logger.warning(
                "skipping window (%s, %d): frames unavailable", video_id, start
            )
            continue
        maps = []
        for t in range(omega):
            key = (video_id, start + t)
            if key not in edge_cache:
                edge_cache[key] = canny(stack.frames[start + t], low, high, blur_sigma)
            maps.append(edge_cache[key])
        window_clip = np.stack(maps)
        total = window_clip if total is None else total + window_clip
        used += 1

    if used == 0:
        raise ValueError("no usable windows: frames missing for every candidate")
    mean = total / used
    peak = mean.max()
    if peak > 0:
        mean = mean / peak
    return EnsembleClip(
        frames=mean,
        window_count=used,
        region=region,
        canny_low=low,
        canny_high=high,
        blur_sigma=blur_sigma,
    )


def export_clip(clip: EnsembleClip, directory: str | Path) -> list[Path]:
    """Write one 8-bit PNG per offset plus clip.json metadata."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for t in range(len(clip)):
        values = np.floor(clip.frames[t] * 255.0 + 0.5).astype(np.uint8)
        path = directory / f"{t:06d}.png"
        Image.fromarray(values, mode="L").save(path)
        paths.append(path)
    meta = {
        "window_count": clip.window_count,
        "region": clip.region.to_json() if clip.region is not None else None,
        "canny": {"low": clip.canny_low, "high": clip.canny_high, "sigma": clip.blur_sigma},
        "n_frames": len(clip),
    }
    with open(directory / "clip.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
