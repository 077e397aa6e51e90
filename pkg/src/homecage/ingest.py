"""Parsers for the three external inputs: detection streams, pose tables,
and grayscale frame sequences.

All parsers are strict about structure (they report the offending line) but
lenient about numeric gaps: empty, non-numeric, or non-finite cells become
MISSING samples rather than errors.  A MISSING sample is represented as NaN
in both the position and likelihood arrays.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image

DEFAULT_FPS = 25.0

# BT.601 luma weights used when collapsing color frames to grayscale.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class FormatError(ValueError):
    """Raised when an input stream violates its declared format."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned detection box in frame coordinates with a confidence."""

    x0: float
    y0: float
    x1: float
    y1: float
    confidence: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"degenerate box {self}")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    def expanded(self, delta: float) -> tuple[float, float, float, float]:
        """Rectangle grown by ``delta`` pixels on every edge (unclamped)."""
        return (self.x0 - delta, self.y0 - delta, self.x1 + delta, self.y1 + delta)


@dataclass
class FrameDetectionSeries:
    """Ordered per-frame detection lists for one source video."""

    video_id: str
    fps: float
    frames: list[tuple[int, list[BoundingBox]]]

    def frame_count(self) -> int:
        return len(self.frames)

    def box_count(self) -> int:
        return sum(len(boxes) for _, boxes in self.frames)


@dataclass(eq=False)
class PoseSeries:
    """Per-frame, per-bodypart keypoint estimates for one video.

    ``xy`` has shape (frames, parts, 2) and ``likelihood`` (frames, parts);
    MISSING samples are NaN in all three cells.
    """

    video_id: str
    bodyparts: list[str]
    xy: np.ndarray
    likelihood: np.ndarray
    scorer: str = "scorer"
    frame_index: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.xy = np.asarray(self.xy, dtype=np.float64)
        self.likelihood = np.asarray(self.likelihood, dtype=np.float64)
        if self.xy.ndim != 3 or self.xy.shape[2] != 2:
            raise ValueError(f"xy must be (frames, parts, 2), got {self.xy.shape}")
        if self.likelihood.shape != self.xy.shape[:2]:
            raise ValueError("likelihood shape does not match xy")
        if self.xy.shape[1] != len(self.bodyparts):
            raise ValueError("bodypart count does not match sample width")
        if self.xy.shape[0] < 1:
            raise ValueError("pose series must contain at least one frame")
        if self.frame_index is None:
            self.frame_index = np.arange(self.xy.shape[0], dtype=np.int64)
        else:
            self.frame_index = np.asarray(self.frame_index, dtype=np.int64)

    @property
    def n_frames(self) -> int:
        return self.xy.shape[0]

    def missing_mask(self) -> np.ndarray:
        """Boolean (frames, parts) mask of MISSING samples."""
        return np.isnan(self.likelihood) | np.isnan(self.xy).any(axis=2)

    def part_index(self, part: str) -> int:
        try:
            return self.bodyparts.index(part)
        except ValueError:
            raise KeyError(f"unknown bodypart {part!r}") from None

    def slice_frames(self, start: int, end: int) -> "PoseSeries":
        """Rows for frames ``start`` .. ``end`` inclusive (positional)."""
        return PoseSeries(
            video_id=self.video_id,
            bodyparts=list(self.bodyparts),
            xy=self.xy[start : end + 1].copy(),
            likelihood=self.likelihood[start : end + 1].copy(),
            scorer=self.scorer,
            frame_index=self.frame_index[start : end + 1].copy(),
        )

    def equals(self, other: "PoseSeries") -> bool:
        """NaN-aware structural equality."""
        return (
            self.video_id == other.video_id
            and self.bodyparts == other.bodyparts
            and self.xy.shape == other.xy.shape
            and bool(np.array_equal(self.xy, other.xy, equal_nan=True))
            and bool(np.array_equal(self.likelihood, other.likelihood, equal_nan=True))
            and bool(np.array_equal(self.frame_index, other.frame_index))
        )


@dataclass
class FrameStack:
    """Ordered grayscale frames of identical dimensions, uint8 in [0, 255]."""

    video_id: str
    frames: np.ndarray  # (n, height, width) uint8

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.uint8)
        if self.frames.ndim != 3:
            raise ValueError("frames must be a (n, height, width) stack")

    def __len__(self) -> int:
        return self.frames.shape[0]


def _coerce_number(value, what: str, line: int) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise FormatError(f"{what} must be a number, got {value!r}", line)
    return float(value)


def parse_detections(stream: str | Iterable[str], video_id: str = "video") -> FrameDetectionSeries:
    """Parse a detection JSONL stream into a FrameDetectionSeries.

    The optional first line is a header object carrying ``video_id`` and
    ``fps``; every other line is ``{"frame": int, "boxes": [...]}``.  Frame
    indices must be strictly increasing.  Raises FormatError with the
    offending line number on malformed input.
    """
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = [line.rstrip("\n") for line in stream]

    fps = DEFAULT_FPS
    frames: list[tuple[int, list[BoundingBox]]] = []
    last_index = -1

    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON ({exc.msg})", lineno) from exc
        if not isinstance(record, dict):
            raise FormatError("record must be a JSON object", lineno)

        if "frame" not in record:
            if lineno == 1 and frames == []:
                # Header line: video id and capture rate.
                if "video_id" in record:
                    video_id = str(record["video_id"])
                if "fps" in record:
                    fps = _coerce_number(record["fps"], "fps", lineno)
                    if fps <= 0:
                        raise FormatError(f"fps must be positive, got {fps}", lineno)
                continue
            raise FormatError("record missing 'frame' key", lineno)

        index = record["frame"]
        if not isinstance(index, int) or isinstance(index, bool):
            raise FormatError(f"frame index must be an integer, got {index!r}", lineno)
        if index <= last_index:
            raise FormatError(
                f"frame index {index} not greater than previous {last_index}", lineno
            )
        last_index = index

        boxes_json = record.get("boxes", [])
        if not isinstance(boxes_json, list):
            raise FormatError("'boxes' must be a list", lineno)
        boxes = []
        for j, b in enumerate(boxes_json):
            if not isinstance(b, dict):
                raise FormatError(f"box {j} must be an object", lineno)
            try:
                box = BoundingBox(
                    x0=_coerce_number(b.get("x0"), "x0", lineno),
                    y0=_coerce_number(b.get("y0"), "y0", lineno),
                    x1=_coerce_number(b.get("x1"), "x1", lineno),
                    y1=_coerce_number(b.get("y1"), "y1", lineno),
                    confidence=_coerce_number(b.get("confidence"), "confidence", lineno),
                )
            except ValueError as exc:
                raise FormatError(f"box {j}: {exc}", lineno) from exc
            boxes.append(box)
        frames.append((index, boxes))

    return FrameDetectionSeries(video_id=video_id, fps=fps, frames=frames)


def serialize_detections(series: FrameDetectionSeries) -> str:
    """Inverse of parse_detections; always emits the header line."""
    out = [json.dumps({"video_id": series.video_id, "fps": series.fps})]
    for index, boxes in series.frames:
        out.append(
            json.dumps(
                {
                    "frame": index,
                    "boxes": [
                        {
                            "x0": b.x0,
                            "y0": b.y0,
                            "x1": b.x1,
                            "y1": b.y1,
                            "confidence": b.confidence,
                        }
                        for b in boxes
                    ],
                }
            )
        )
    return "\n".join(out) + "\n"


def _parse_cell(text: str) -> float:
    """Numeric cell or NaN for empty/non-numeric/non-finite content."""
    text = text.strip()
    if not text:
        return math.nan
    try:
        value = float(text)
    except ValueError:
        return math.nan
    return value if math.isfinite(value) else math.nan


def parse_pose_csv(stream: str | Iterable[str], video_id: str | None = None) -> PoseSeries:
    """Parse a three-header-row keypoint CSV into a PoseSeries.

    Header rows name the scorer, the bodyparts (each thrice), and the
    coords (x, y, likelihood per part).  Any sample with an empty or
    non-numeric cell becomes MISSING; a present likelihood outside [0, 1]
    is an error.
    """
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = [line.rstrip("\n") for line in stream]
    rows = [line.split(",") for line in lines if line.strip()]
    if len(rows) < 4:
        raise FormatError("expected 3 header rows and at least 1 data row")

    scorer_row, part_row, coord_row = rows[0], rows[1], rows[2]
    if scorer_row[0].strip().lower() != "scorer":
        raise FormatError("row 1 must start with 'scorer'", 1)
    if part_row[0].strip().lower() != "bodyparts":
        raise FormatError("row 2 must start with 'bodyparts'", 2)
    if coord_row[0].strip().lower() != "coords":
        raise FormatError("row 3 must start with 'coords'", 3)

    width = len(part_row) - 1
    if width < 3 or width % 3 != 0:
        raise FormatError(f"bodyparts row must carry triplets, got {width} columns", 2)
    if len(coord_row) - 1 != width:
        raise FormatError("coords row width differs from bodyparts row", 3)

    bodyparts: list[str] = []
    for i in range(0, width, 3):
        triple = [part_row[1 + i + j].strip() for j in range(3)]
        if len(set(triple)) != 1 or not triple[0]:
            raise FormatError(f"bodypart columns {i + 1}-{i + 3} must repeat one name", 2)
        coords = [coord_row[1 + i + j].strip().lower() for j in range(3)]
        if coords != ["x", "y", "likelihood"]:
            raise FormatError(
                f"coords for {triple[0]!r} must be x,y,likelihood, got {coords}", 3
            )
        bodyparts.append(triple[0])

    scorer = scorer_row[1].strip() if len(scorer_row) > 1 else "scorer"
    n_parts = len(bodyparts)

    data_rows = rows[3:]
    xy = np.full((len(data_rows), n_parts, 2), np.nan)
    likelihood = np.full((len(data_rows), n_parts), np.nan)
    frame_index = np.zeros(len(data_rows), dtype=np.int64)

    for r, row in enumerate(data_rows):
        lineno = r + 4
        if len(row) - 1 != width:
            raise FormatError(
                f"row has {len(row) - 1} value columns, header declares {width}", lineno
            )
        try:
            frame_index[r] = int(float(row[0]))
        except ValueError:
            raise FormatError(f"frame index {row[0]!r} is not numeric", lineno) from None
        for p in range(n_parts):
            x = _parse_cell(row[1 + 3 * p])
            y = _parse_cell(row[2 + 3 * p])
            lk = _parse_cell(row[3 + 3 * p])
            if not math.isnan(lk) and not (0.0 <= lk <= 1.0):
                raise FormatError(
                    f"likelihood {lk} for {bodyparts[p]!r} outside [0, 1]", lineno
                )
            if math.isnan(x) or math.isnan(y) or math.isnan(lk):
                continue  # sample stays MISSING
            xy[r, p, 0] = x
            xy[r, p, 1] = y
            likelihood[r, p] = lk

    if video_id is None:
        video_id = scorer
    return PoseSeries(
        video_id=video_id,
        bodyparts=bodyparts,
        xy=xy,
        likelihood=likelihood,
        scorer=scorer,
        frame_index=frame_index,
    )


def _format_cell(value: float) -> str:
    return "" if math.isnan(value) else repr(float(value))


def serialize_pose_csv(pose: PoseSeries) -> str:
    """Inverse of parse_pose_csv; MISSING samples become empty cells."""
    header1 = ["scorer"] + [pose.scorer] * (3 * len(pose.bodyparts))
    header2 = ["bodyparts"] + [p for part in pose.bodyparts for p in (part,) * 3]
    header3 = ["coords"] + ["x", "y", "likelihood"] * len(pose.bodyparts)
    out = [",".join(header1), ",".join(header2), ",".join(header3)]
    for r in range(pose.n_frames):
        cells = [str(int(pose.frame_index[r]))]
        for p in range(len(pose.bodyparts)):
            cells.append(_format_cell(pose.xy[r, p, 0]))
            cells.append(_format_cell(pose.xy[r, p, 1]))
            cells.append(_format_cell(pose.likelihood[r, p]))
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def to_luma(rgb: np.ndarray) -> np.ndarray:
    """Collapse an (h, w, 3) uint8 array to luma, rounding half away from zero."""
    weights = np.array(LUMA_WEIGHTS)
    luma = rgb[..., :3].astype(np.float64) @ weights
    return np.floor(luma + 0.5).astype(np.uint8)


_FRAME_FILE = re.compile(r"^(\d{6})\.(png|pgm)$")


def load_frames(directory: str | Path, frame_range: tuple[int, int], video_id: str | None = None) -> FrameStack:
    """Load zero-padded frame images ``<dir>/<%06d>.png|.pgm`` in index order.

    ``frame_range`` is an inclusive (first, last) interval; every index in it
    must exist.  Color inputs are converted to luma.
    """
    directory = Path(directory)
    first, last = frame_range
    if first > last:
        raise ValueError(f"empty frame range {frame_range}")

    available: dict[int, Path] = {}
    for path in directory.iterdir():
        m = _FRAME_FILE.match(path.name)
        if m:
            available.setdefault(int(m.group(1)), path)

    frames: list[np.ndarray] = []
    shape: tuple[int, int] | None = None
    for index in range(first, last + 1):
        path = available.get(index)
        if path is None:
            raise FileNotFoundError(f"missing frame {index:06d} in {directory}")
        with Image.open(path) as img:
            arr = np.asarray(img)
        if arr.ndim == 3:
            arr = to_luma(arr)
        elif arr.ndim != 2:
            raise FormatError(f"{path.name}: unsupported image shape {arr.shape}")
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise FormatError(
                f"{path.name}: dimensions {arr.shape} differ from first frame {shape}"
            )
        frames.append(arr.astype(np.uint8))

    if video_id is None:
        video_id = directory.name
    return FrameStack(video_id=video_id, frames=np.stack(frames))
