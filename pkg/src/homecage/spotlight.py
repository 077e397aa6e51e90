"""Contiguous single-subject segment extraction from per-frame detections.

Confident boxes are associated frame-to-frame by center distance; boxes whose
grown rectangles overlap another detection are treated as collisions and kill
any track they could have continued.  Surviving tracks at least ``min_frames``
long become spotlight segments with per-frame crop rectangles.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ingest import BoundingBox, FrameDetectionSeries


@dataclass
class SpotlightConfig:
    """Tracking thresholds; defaults follow the pipeline's standard settings."""

    confidence_threshold: float = 0.75
    grace_delta: float = 50.0
    epsilon: float = 50.0
    min_frames: int = 50
    frame_bounds: tuple[float, float] = (1280.0, 720.0)  # width, height

    def __post_init__(self):
        if not (0.0 <= self.confidence_threshold <= 1.0):
            raise ValueError("confidence_threshold must be in [0, 1]")
        if self.grace_delta < 0 or self.epsilon < 0:
            raise ValueError("grace_delta and epsilon must be >= 0")
        if self.min_frames < 1:
            raise ValueError("min_frames must be >= 1")


@dataclass
class SpotlightSegment:
    """One contiguous track of a single subject with per-frame crops."""

    video_id: str
    track_id: int
    start_frame: int
    end_frame: int
    crops: list[tuple[float, float, float, float]]
    centers: list[tuple[float, float]]

    @property
    def n_frames(self) -> int:
        return self.end_frame - self.start_frame + 1

    @property
    def segment_id(self) -> str:
        return f"{self.video_id}#{self.track_id}"


@dataclass
class Track:
    """Mutable association state for one in-progress track."""

    track_id: int
    start_frame: int
    boxes: list[BoundingBox] = field(default_factory=list)
    frames: list[int] = field(default_factory=list)

    @property
    def last_center(self) -> tuple[float, float]:
        return self.boxes[-1].center

    @property
    def last_frame(self) -> int:
        return self.frames[-1]


def filter_confident(series: FrameDetectionSeries, confidence_threshold: float) -> FrameDetectionSeries:
    """Keep only boxes with confidence >= threshold; empty frames survive."""
    frames = [
        (index, [b for b in boxes if b.confidence >= confidence_threshold])
        for index, boxes in series.frames
    ]
    return FrameDetectionSeries(video_id=series.video_id, fps=series.fps, frames=frames)


def find_collisions(boxes: list[BoundingBox], grace_delta: float) -> set[tuple[int, int]]:
    """Index pairs (i < j) whose delta-grown rectangles overlap with positive area."""
    grown = [b.expanded(grace_delta) for b in boxes]
    collisions = set()
    for i in range(len(grown)):
        ax0, ay0, ax1, ay1 = grown[i]
        for j in range(i + 1, len(grown)):
            bx0, by0, bx1, by1 = grown[j]
            if ax0 < bx1 and bx0 < ax1 and ay0 < by1 and by0 < ay1:
                collisions.add((i, j))
    return collisions


def associate_tracks(
    series: FrameDetectionSeries, epsilon: float, grace_delta: float
) -> list[Track]:
    """Associate confident detections into contiguous tracks.

    Per frame: colliding boxes terminate every live track within epsilon of
    them and join nothing.  Each non-colliding box targets only the nearest
    live track within epsilon; if two boxes target the same track the nearer
    one (lower index on an exact tie) wins and the loser starts a new track.
    A track ends whenever no box continues it on the immediately next frame.
    """
    live: list[Track] = []
    done: list[Track] = []
    next_id = 0

    for frame_index, boxes in series.frames:
        # Tracks are contiguous: a skipped frame index ends every live track.
        still_live = []
        for track in live:
            if track.last_frame == frame_index - 1:
                still_live.append(track)
            else:
                done.append(track)
        live = still_live

        colliding: set[int] = set()
        for i, j in find_collisions(boxes, grace_delta):
            colliding.add(i)
            colliding.add(j)
        centers = [b.center for b in boxes]

        # Collision poisoning: a colliding box kills any track it could extend.
        poisoned: set[int] = set()
        for t, track in enumerate(live):
            cx, cy = track.last_center
            for i in colliding:
                if math.hypot(centers[i][0] - cx, centers[i][1] - cy) <= epsilon:
                    poisoned.add(t)
                    break

        # Each non-colliding box targets its single nearest surviving track.
        claims: dict[int, list[tuple[float, int]]] = {}
        unmatched: list[int] = []
        for i in range(len(boxes)):
            if i in colliding:
                continue
            best_t = -1
            best_d = math.inf
            for t, track in enumerate(live):
                if t in poisoned:
                    continue
                cx, cy = track.last_center
                d = math.hypot(centers[i][0] - cx, centers[i][1] - cy)
                if d <= epsilon and d < best_d:
                    best_d = d
                    best_t = t
            if best_t >= 0:
                claims.setdefault(best_t, []).append((best_d, i))
            else:
                unmatched.append(i)

        extended: set[int] = set()
        for t, claimants in claims.items():
            claimants.sort()  # nearest first, then lower box index
            _, winner = claimants[0]
            live[t].boxes.append(boxes[winner])
            live[t].frames.append(frame_index)
            extended.add(t)
            for _, loser in claimants[1:]:
                unmatched.append(loser)

        survivors = []
        for t, track in enumerate(live):
            if t in extended:
                survivors.append(track)
            else:
                done.append(track)
        live = survivors

        for i in sorted(unmatched):
            track = Track(track_id=next_id, start_frame=frame_index)
            next_id += 1
            track.boxes.append(boxes[i])
            track.frames.append(frame_index)
            live.append(track)

    done.extend(live)
    done.sort(key=lambda t: t.track_id)
    return done


def _clamp_crop(
    box: BoundingBox, grace_delta: float, frame_bounds: tuple[float, float]
) -> tuple[float, float, float, float]:
    width, height = frame_bounds
    x0, y0, x1, y1 = box.expanded(grace_delta)
    return (max(x0, 0.0), max(y0, 0.0), min(x1, width), min(y1, height))


def extract_segments(
    tracks: list[Track],
    video_id: str,
    min_frames: int,
    frame_bounds: tuple[float, float],
    grace_delta: float,
) -> list[SpotlightSegment]:
    """Drop tracks shorter than min_frames; grow and clamp per-frame crops."""
    segments = []
    for track in tracks:
        if len(track.frames) < min_frames:
            continue
        segments.append(
            SpotlightSegment(
                video_id=video_id,
                track_id=track.track_id,
                start_frame=track.frames[0],
                end_frame=track.frames[-1],
                crops=[_clamp_crop(b, grace_delta, frame_bounds) for b in track.boxes],
                centers=[b.center for b in track.boxes],
            )
        )
    return segments


def find_segments(series: FrameDetectionSeries, config: SpotlightConfig) -> list[SpotlightSegment]:
    """Full spotlight pass: confidence filter, association, length filter."""
    confident = filter_confident(series, config.confidence_threshold)
    tracks = associate_tracks(confident, config.epsilon, config.grace_delta)
    return extract_segments(
        tracks, series.video_id, config.min_frames, config.frame_bounds, config.grace_delta
    )


@dataclass
class LengthHistogram:
    """Segment-duration histogram in seconds."""

    bin_edges: np.ndarray  # len(counts) + 1
    counts: np.ndarray
    count_at_least_8s: int
    total: int


def length_histogram(
    segments: list[SpotlightSegment], fps: float, bin_seconds: float = 1.0
) -> LengthHistogram:
    """Histogram of segment durations plus the count lasting at least 8 s."""
    durations = np.array([s.n_frames / fps for s in segments])
    if durations.size == 0:
        return LengthHistogram(
            bin_edges=np.array([0.0]), counts=np.array([], dtype=np.int64),
            count_at_least_8s=0, total=0,
        )
    n_bins = int(math.floor(durations.max() / bin_seconds)) + 1
    edges = np.arange(n_bins + 1) * bin_seconds
    counts, _ = np.histogram(durations, bins=edges)
    return LengthHistogram(
        bin_edges=edges,
        counts=counts.astype(np.int64),
        count_at_least_8s=int((durations >= 8.0).sum()),
        total=len(segments),
    )


def write_segments_jsonl(segments: list[SpotlightSegment], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in segments:
            fh.write(
                json.dumps(
                    {
                        "video_id": s.video_id,
                        "track_id": s.track_id,
                        "start": s.start_frame,
                        "end": s.end_frame,
                        "crops": [list(c) for c in s.crops],
                        "centers": [list(c) for c in s.centers],
                    }
                )
                + "\n"
            )


def read_segments_jsonl(path: str | Path) -> list[SpotlightSegment]:
    segments = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            segments.append(
                SpotlightSegment(
                    video_id=rec["video_id"],
                    track_id=rec["track_id"],
                    start_frame=rec["start"],
                    end_frame=rec["end"],
                    crops=[tuple(c) for c in rec["crops"]],
                    centers=[tuple(c) for c in rec["centers"]],
                )
            )
    return segments
