"""Synthetic corpora with ground-truth sidecars.

Stand-ins for real home-cage footage: each profile emits the pipeline's
input formats (detection JSONL, pose CSV, frame PNGs) plus a truth.json
that oracle tests can check against.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .ingest import PoseSeries

PROFILES = ("blobs", "rings", "behavior-modes", "spike-track", "crossing-boxes")

FRAME_WIDTH = 1280.0
FRAME_HEIGHT = 720.0


# ---------------------------------------------------------------------------
# Point-cloud profiles (consumed directly by embedding tests)
# ---------------------------------------------------------------------------


def make_blobs(
    seed: int = 0,
    n_per_blob: int = 300,
    dims: int = 120,
    n_blobs: int = 3,
    sigma: float = 0.1,
    center_distance: float = 10.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Well-separated isotropic Gaussian blobs; returns (points, labels)."""
    rng = np.random.default_rng(seed)
    centers = np.zeros((n_blobs, dims))
    for i in range(n_blobs):
        # Orthogonal axes keep every pair exactly sqrt(2)*d/sqrt(2) = d apart.
        centers[i, i] = center_distance
    points = []
    labels = []
    for i in range(n_blobs):
        points.append(centers[i] + rng.normal(scale=sigma, size=(n_per_blob, dims)))
        labels.append(np.full(n_per_blob, i))
    return np.concatenate(points), np.concatenate(labels)


def make_rings(
    seed: int = 0,
    n_per_ring: int = 400,
    dims: int = 120,
    radii: tuple[float, float] = (1.0, 3.0),
    noise: float = 0.02,
    warp: float = 0.5,
) -> tuple[np.ndarray, np.ndarray]:
    """Two concentric circles lifted to high dimension.

    The lift is a fixed random linear map plus a sinusoidal warp of the
    planar coordinates, so the structure stays 2-D but is not linearly
    recoverable as separated clusters.
    """
    rng = np.random.default_rng(seed)
    planar = []
    labels = []
    for ring, radius in enumerate(radii):
        theta = rng.uniform(0.0, 2.0 * math.pi, size=n_per_ring)
        xy = np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1)
        xy += rng.normal(scale=noise, size=xy.shape)
        planar.append(xy)
        labels.append(np.full(n_per_ring, ring))
    z = np.concatenate(planar)
    lift = rng.normal(size=(2, dims)) / math.sqrt(2.0)
    mix = rng.normal(size=(2, dims))
    points = z @ lift + warp * np.sin(z @ mix)
    return points, np.concatenate(labels)


# ---------------------------------------------------------------------------
# spike-track: a noisy walk with injected single-frame position spikes
# ---------------------------------------------------------------------------


def make_spike_track(
    seed: int = 0,
    n_frames: int = 2000,
    n_spikes: int = 20,
    spike_magnitude: float = 50.0,
    noise_sigma: float = 1.0,
) -> tuple[np.ndarray, list[int]]:
    """(track, spike_frames): smooth drift + noise, with huge one-frame spikes."""
    rng = np.random.default_rng(seed)
    t = np.arange(n_frames)
    base = np.stack(
        [
            600.0 + 150.0 * np.sin(2.0 * math.pi * t / 900.0),
            360.0 + 120.0 * np.cos(2.0 * math.pi * t / 1100.0),
        ],
        axis=1,
    )
    track = base + rng.normal(scale=noise_sigma, size=base.shape)

    # Spikes spaced well apart, never in the first or last few frames.
    slots = np.linspace(20, n_frames - 20, n_spikes).astype(int)
    spike_frames = sorted(int(s + rng.integers(-5, 6)) for s in slots)
    for frame in spike_frames:
        angle = rng.uniform(0.0, 2.0 * math.pi)
        track[frame] += spike_magnitude * np.array([math.cos(angle), math.sin(angle)])
    return track, spike_frames


def spike_track_pose(track: np.ndarray, video_id: str = "spike") -> PoseSeries:
    """Wrap a single track as a one-bodypart pose series, likelihood 1."""
    xy = track[:, None, :]
    likelihood = np.ones((track.shape[0], 1))
    return PoseSeries(
        video_id=video_id, bodyparts=["snout"], xy=xy, likelihood=likelihood
    )


# ---------------------------------------------------------------------------
# crossing-boxes: hand-derivable detection scenario
# ---------------------------------------------------------------------------

_BOX_SIZE = 60.0
_SPEED = 6.0


def make_crossing_boxes(seed: int = 0) -> tuple[list[dict], dict]:
    """Scripted detection records plus hand-derived segment truth.

    Two boxes close head-on along one row and collide mid-sequence; their
    tracks must end on the last pre-collision frame and restart once the
    grown rectangles separate.  A third short-lived box lasts exactly 49
    frames so the default min_frames=50 drops it.  A fourth box is low
    confidence throughout and must never track.
    """
    del seed  # the scenario is fully scripted
    n_frames = 150
    records = []

    def box(cx: float, cy: float, confidence: float) -> dict:
        h = _BOX_SIZE / 2.0
        return {
            "x0": cx - h,
            "y0": cy - h,
            "x1": cx + h,
            "y1": cy + h,
            "confidence": confidence,
        }

    a_center = lambda t: (190.0 + _SPEED * t, 300.0)
    b_center = lambda t: (1090.0 - _SPEED * t, 300.0)
    c_center = lambda t: (200.0 + 2.0 * t, 600.0)

    for t in range(n_frames):
        boxes = [box(*a_center(t), 0.95), box(*b_center(t), 0.9)]
        if t < 49:
            boxes.append(box(*c_center(t), 0.85))
        boxes.append(box(640.0, 100.0, 0.5))  # always below the 0.75 threshold
        records.append({"frame": t, "boxes": boxes})

    # Expanded rectangles (delta=50) overlap while |dx| < box + 2*delta = 160.
    # |dx| = |900 - 12 t|: first overlap at t=62, first separation at t=89.
    collision_start = 62
    restart = 89
    truth = {
        "collision_start": collision_start,
        "restart": restart,
        "dropped_track_frames": 49,
        "segments": [
            {"start": 0, "end": collision_start - 1, "centers": [a_center(t) for t in range(collision_start)]},
            {"start": 0, "end": collision_start - 1, "centers": [b_center(t) for t in range(collision_start)]},
            {"start": restart, "end": n_frames - 1, "centers": [a_center(t) for t in range(restart, n_frames)]},
            {"start": restart, "end": n_frames - 1, "centers": [b_center(t) for t in range(restart, n_frames)]},
        ],
    }
    return records, truth


# ---------------------------------------------------------------------------
# behavior-modes: full corpus with three scripted movement patterns
# ---------------------------------------------------------------------------

MODE_NAMES = ["swirl", "bob", "scissor"]
N_PARTS = 5
_PART_NAMES = ["leftear", "rightear", "snout", "lefthand", "righthand"]

# Resting offsets of the five keypoints around the body center.
_PART_OFFSETS = np.array(
    [[-12.0, -10.0], [12.0, -10.0], [0.0, -20.0], [-10.0, 8.0], [10.0, 8.0]]
)


def _mode_offsets(mode: int, t: np.ndarray) -> np.ndarray:
    """(len(t), parts, 2) keypoint offsets for one movement pattern."""
    n = t.shape[0]
    out = np.tile(_PART_OFFSETS, (n, 1, 1))
    phase = t[:, None] * 2.0 * math.pi
    if mode == 0:  # swirl: all parts orbit the center
        r = 6.0
        angle = phase / 20.0 + np.arange(N_PARTS)[None, :] * (2 * math.pi / N_PARTS)
        out[:, :, 0] += r * np.cos(angle)
        out[:, :, 1] += r * np.sin(angle)
    elif mode == 1:  # bob: vertical head bobbing, hands still
        bob = 8.0 * np.sin(phase / 12.0)
        out[:, :3, 1] += bob
    else:  # scissor: hands alternate horizontally
        swing = 9.0 * np.sin(phase / 16.0)
        out[:, 3, 0] += swing[:, 0]
        out[:, 4, 0] -= swing[:, 0]
    return out


def make_behavior_modes(
    seed: int = 0,
    n_videos: int = 6,
    frames_per_video: int = 500,
    noise_sigma: float = 0.3,
    dropout_rate: float = 0.01,
) -> tuple[list[PoseSeries], list[dict], dict]:
    """Pose series + detection records + truth for the three-mode corpus.

    Videos 0..2 hold one pure mode each; the rest switch modes halfway.
    Dropouts are short runs of low likelihood; truth labels every frame
    with its mode and lists the dropouts.
    """
    rng = np.random.default_rng(seed)
    poses = []
    detections = []
    truth_videos = []

    for v in range(n_videos):
        if v < 3:
            schedule = [(v % 3, frames_per_video)]
        else:
            half = frames_per_video // 2
            first = v % 3
            second = (v + 1) % 3
            schedule = [(first, half), (second, frames_per_video - half)]

        t = np.arange(frames_per_video, dtype=np.float64)
        # Slow body drift around the cage.
        center = np.stack(
            [
                640.0 + 180.0 * np.sin(2.0 * math.pi * t / 700.0 + v),
                360.0 + 120.0 * np.cos(2.0 * math.pi * t / 850.0 + 0.7 * v),
            ],
            axis=1,
        )

        mode_per_frame = np.empty(frames_per_video, dtype=np.int64)
        offsets = np.empty((frames_per_video, N_PARTS, 2))
        cursor = 0
        for mode, length in schedule:
            seg = slice(cursor, cursor + length)
            mode_per_frame[seg] = mode
            offsets[seg] = _mode_offsets(mode, t[seg])
            cursor += length

        xy = center[:, None, :] + offsets
        xy += rng.normal(scale=noise_sigma, size=xy.shape)
        likelihood = rng.uniform(0.85, 1.0, size=(frames_per_video, N_PARTS))

        # Injected low-likelihood dropouts: short runs per (frame, part).
        dropouts = []
        n_dropouts = rng.poisson(dropout_rate * frames_per_video * N_PARTS)
        for _ in range(n_dropouts):
            part = int(rng.integers(0, N_PARTS))
            start = int(rng.integers(0, frames_per_video - 4))
            length = int(rng.integers(1, 4))
            likelihood[start : start + length, part] = rng.uniform(
                0.05, 0.4, size=min(length, frames_per_video - start)
            )
            dropouts.append({"part": _PART_NAMES[part], "start": start, "length": length})

        video_id = f"modes{v:02d}"
        poses.append(
            PoseSeries(
                video_id=video_id,
                bodyparts=list(_PART_NAMES),
                xy=xy,
                likelihood=likelihood,
                scorer="synth",
            )
        )

        records = []
        for frame in range(frames_per_video):
            cx, cy = center[frame]
            half = 55.0
            records.append(
                {
                    "frame": frame,
                    "boxes": [
                        {
                            "x0": float(cx - half),
                            "y0": float(cy - half),
                            "x1": float(cx + half),
                            "y1": float(cy + half),
                            "confidence": 0.95,
                        }
                    ],
                }
            )
        detections.append({"video_id": video_id, "records": records})
        truth_videos.append(
            {
                "video_id": video_id,
                "modes": mode_per_frame.tolist(),
                "dropouts": dropouts,
            }
        )

    truth = {"mode_names": MODE_NAMES, "videos": truth_videos}
    return poses, detections, truth


# ---------------------------------------------------------------------------
# Frame rendering (small synthetic camera frames for ensemble work)
# ---------------------------------------------------------------------------


def render_frames(
    centers: np.ndarray, width: int = 320, height: int = 180, scale: float = 0.25
) -> np.ndarray:
    """Tiny grayscale frames: static bright border plus a moving square.

    ``centers`` are full-resolution coordinates; ``scale`` maps them into the
    small frame.  Returns (n, height, width) uint8.
    """
    n = centers.shape[0]
    frames = np.zeros((n, height, width), dtype=np.uint8)
    frames[:, 10, 10:-10] = 255  # static background line
    frames[:, -10, 10:-10] = 255
    half = 8
    for i in range(n):
        cx = int(round(centers[i, 0] * scale))
        cy = int(round(centers[i, 1] * scale))
        x0, x1 = max(cx - half, 0), min(cx + half, width)
        y0, y1 = max(cy - half, 0), min(cy + half, height)
        if x0 < x1 and y0 < y1:
            frames[i, y0:y1, x0:x1] = 200
    return frames


# ---------------------------------------------------------------------------
# Corpus writers
# ---------------------------------------------------------------------------


def _write_detection_jsonl(path: Path, video_id: str, fps: float, records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"video_id": video_id, "fps": fps}) + "\n")
        for record in records:
            fh.write(json.dumps(record) + "\n")


def _write_truth(directory: Path, truth: dict) -> None:
    with open(directory / "truth.json", "w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")


def generate(
    profile: str, seed: int, out_dir: str | Path, fps: float = 25.0, frames: bool = False
) -> dict:
    """Emit one synthetic corpus under ``out_dir``; returns its truth dict."""
    from PIL import Image

    from .ingest import serialize_pose_csv  # local import keeps module load light

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if profile == "blobs":
        points, labels = make_blobs(seed=seed)
        np.ascontiguousarray(points, dtype="<f4").tofile(out / "points.f32")
        truth = {
            "profile": "blobs",
            "n_points": int(points.shape[0]),
            "dims": int(points.shape[1]),
            "labels": labels.tolist(),
        }
    elif profile == "rings":
        points, labels = make_rings(seed=seed)
        np.ascontiguousarray(points, dtype="<f4").tofile(out / "points.f32")
        truth = {
            "profile": "rings",
            "n_points": int(points.shape[0]),
            "dims": int(points.shape[1]),
            "labels": labels.tolist(),
        }
    elif profile == "spike-track":
        track, spike_frames = make_spike_track(seed=seed)
        pose = spike_track_pose(track)
        (out / "pose").mkdir(exist_ok=True)
        with open(out / "pose" / "spike.csv", "w", encoding="utf-8") as fh:
            fh.write(serialize_pose_csv(pose))
        truth = {
            "profile": "spike-track",
            "spike_frames": spike_frames,
            "n_frames": int(track.shape[0]),
        }
    elif profile == "crossing-boxes":
        records, truth = make_crossing_boxes(seed=seed)
        (out / "detections").mkdir(exist_ok=True)
        _write_detection_jsonl(out / "detections" / "crossing.jsonl", "crossing", fps, records)
        truth = {"profile": "crossing-boxes", **truth}
    elif profile == "behavior-modes":
        poses, detections, truth = make_behavior_modes(seed=seed)
        (out / "detections").mkdir(exist_ok=True)
        (out / "pose").mkdir(exist_ok=True)
        for pose, det in zip(poses, detections):
            _write_detection_jsonl(
                out / "detections" / f"{pose.video_id}.jsonl", pose.video_id, fps, det["records"]
            )
            with open(out / "pose" / f"{pose.video_id}.csv", "w", encoding="utf-8") as fh:
                fh.write(serialize_pose_csv(pose))
        if frames:
            # Camera frames only for the first video; enough for ensemble work.
            pose = poses[0]
            centers = pose.xy.mean(axis=1)
            rendered = render_frames(centers)
            frames_dir = out / "frames" / pose.video_id
            frames_dir.mkdir(parents=True, exist_ok=True)
            for i in range(rendered.shape[0]):
                Image.fromarray(rendered[i], mode="L").save(frames_dir / f"{i:06d}.png")
        truth = {"profile": "behavior-modes", **truth}
    else:
        raise ValueError(f"unknown profile {profile!r}; choose from {PROFILES}")

    _write_truth(out, truth)
    return truth
