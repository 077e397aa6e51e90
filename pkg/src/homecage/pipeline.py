"""End-to-end batch orchestration.

Every stage reads and writes file artifacts (never in-memory hand-offs), so
any stage can be rerun standalone and a full run is reproducible from its
report.json, which echoes every effective parameter including defaulted
ones.  Determinism mode (the default) forces the single-worker layout
kernel; reruns with equal config and seeds produce byte-identical artifacts.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import ingest, quality, series, spotlight, windows
from .embed import pca_fit, pca_transform, umap_fit
from .series import DegenerateTrackError


class ConfigError(ValueError):
    """Raised when configuration validation fails (before any work starts)."""


@dataclass
class PipelineConfig:
    """Flat run configuration; defaults are the standard pipeline settings."""

    detections_dir: str = ""
    pose_dir: str = ""
    out_dir: str = "run"
    fps: float = 25.0
    confidence: float = 0.75
    delta: float = 50.0
    epsilon: float = 50.0
    min_frames: int = 50
    frame_width: float = 1280.0
    frame_height: float = 720.0
    tau: float = 0.5
    geomean_threshold: float = 0.3
    parts: str = "leftear,rightear,snout,lefthand,righthand"
    dmax: float = 10.0
    interp: str = "cubic"
    smooth: bool = True
    omega: int = 60
    stride: int = 1
    cap: int = 0  # 0 means no cap
    neighbors: int = 200
    min_dist: float = 0.0
    epochs: int = 500
    negative_rate: int = 5
    seed: int = 7
    init: str = "spectral"
    run_pca: bool = False
    pca_dims: int = 2
    workers: int = 0  # 0 means machine parallelism; embed SGD stays single-worker

    def part_list(self) -> list[str]:
        return [p.strip() for p in self.parts.split(",") if p.strip()]

    def validate(self) -> None:
        if not self.detections_dir or not self.pose_dir:
            raise ConfigError("detections_dir and pose_dir are required")
        if not (0.0 <= self.confidence <= 1.0):
            raise ConfigError(f"confidence {self.confidence} outside [0, 1]")
        if not (0.0 <= self.tau <= 1.0):
            raise ConfigError(f"tau {self.tau} outside [0, 1]")
        if not (0.0 <= self.geomean_threshold <= 1.0):
            raise ConfigError(
                f"geomean_threshold {self.geomean_threshold} outside [0, 1]"
            )
        if self.delta < 0 or self.epsilon < 0 or self.dmax < 0:
            raise ConfigError("delta, epsilon, and dmax must be >= 0")
        if self.min_frames < 1 or self.omega < 1 or self.stride < 1:
            raise ConfigError("min_frames, omega, and stride must be >= 1")
        if self.interp not in ("cubic", "linear"):
            raise ConfigError(f"interp must be cubic or linear, got {self.interp!r}")
        if self.neighbors < 1:
            raise ConfigError("neighbors must be >= 1")
        if not (0.0 <= self.min_dist <= 1.0):
            raise ConfigError(f"min_dist {self.min_dist} outside [0, 1]")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if not self.part_list():
            raise ConfigError("parts must name at least one bodypart")


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> PipelineConfig:
    """Merge config file values and CLI overrides (overrides win)."""
    config = PipelineConfig()
    known = {f.name: f.type for f in fields(PipelineConfig)}
    merged: dict = {}
    merged.update(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    for key, value in merged.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        current = getattr(config, key)
        if isinstance(current, bool):
            if isinstance(value, str):
                lowered = value.lower()
                if lowered in _BOOL_TRUE:
                    value = True
                elif lowered in _BOOL_FALSE:
                    value = False
                else:
                    raise ConfigError(f"config key {key!r}: not a boolean: {value!r}")
            setattr(config, key, bool(value))
        elif isinstance(current, int):
            setattr(config, key, int(value))
        elif isinstance(current, float):
            setattr(config, key, float(value))
        else:
            setattr(config, key, str(value))
    return config


@dataclass
class RunReport:
    parameters: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    timings_ms: dict = field(default_factory=dict)

    def save(self, path: Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "parameters": self.parameters,
                    "counts": self.counts,
                    "timings_ms": self.timings_ms,
                },
                fh,
                indent=2,
                sort_keys=True,
            )
            fh.write("\n")


def _segment_pose(pose: ingest.PoseSeries, segment: spotlight.SpotlightSegment) -> ingest.PoseSeries:
    sliced = pose.slice_frames(segment.start_frame, segment.end_frame)
    sliced.video_id = segment_id(segment)
    return sliced


def segment_id(segment: spotlight.SpotlightSegment) -> str:
    return f"{segment.video_id}.t{segment.track_id}"


def source_video_of(segment_or_window_id: str) -> str:
    """Strip the `.t<track>` suffix a segment id carries."""
    base, sep, tail = segment_or_window_id.rpartition(".t")
    if sep and tail.isdigit():
        return base
    return segment_or_window_id


def stage_spotlight(
    detections_dir: Path, spot_config: spotlight.SpotlightConfig
) -> tuple[list[spotlight.SpotlightSegment], dict]:
    """Stage 1: every detection JSONL in the directory -> spotlight segments."""
    detection_files = sorted(detections_dir.glob("*.jsonl"))
    if not detection_files:
        raise ConfigError(f"no .jsonl detection files in {detections_dir}")
    segments: list[spotlight.SpotlightSegment] = []
    counts = {"videos_in": len(detection_files), "frames_in": 0, "boxes_in": 0}
    for path in detection_files:
        det = ingest.parse_detections(path.read_text(encoding="utf-8"), video_id=path.stem)
        counts["frames_in"] += det.frame_count()
        counts["boxes_in"] += det.box_count()
        segments.extend(spotlight.find_segments(det, spot_config))
    counts["segments_kept"] = len(segments)
    return segments, counts


def stage_quality(
    segments: list[spotlight.SpotlightSegment],
    pose_dir: Path,
    parts: list[str],
    tau: float,
    geomean_threshold: float,
) -> tuple[list[quality.QualityReport], list[str], quality.SelectionTradeoff, dict]:
    """Stage 2: slice pose tables per segment, score, and select."""
    pose_cache: dict[str, ingest.PoseSeries] = {}
    segment_poses: dict[str, ingest.PoseSeries] = {}
    reports: list[quality.QualityReport] = []
    for segment in segments:
        if segment.video_id not in pose_cache:
            pose_path = pose_dir / f"{segment.video_id}.csv"
            if not pose_path.exists():
                raise ConfigError(f"missing pose table {pose_path}")
            pose_cache[segment.video_id] = ingest.parse_pose_csv(
                pose_path.read_text(encoding="utf-8"), video_id=segment.video_id
            )
        pose = pose_cache[segment.video_id]
        if segment.end_frame >= pose.n_frames:
            raise ConfigError(
                f"segment {segment_id(segment)} ends at {segment.end_frame} but pose "
                f"table has {pose.n_frames} frames"
            )
        seg_pose = _segment_pose(pose, segment)
        segment_poses[seg_pose.video_id] = seg_pose
        reports.append(quality.compute_report(seg_pose, parts, tau))
    selected_ids, tradeoff = quality.select_videos(reports, geomean_threshold)
    return reports, selected_ids, tradeoff, segment_poses


def stage_clean(
    segment_poses: dict[str, ingest.PoseSeries],
    selected_ids: list[str],
    parts: list[str],
    tau: float,
    dmax: float,
    interp: str,
    smooth: bool,
    clean_dir: Path | None = None,
) -> tuple[list[series.CleanSeries], list[dict]]:
    """Stage 3: mask, smooth, interpolate, normalize, in sorted-id order.

    Lexicographic order keeps standalone stage reruns bit-identical to the
    orchestrated pass.
    """
    if clean_dir is not None:
        clean_dir.mkdir(parents=True, exist_ok=True)
    cleaned: list[series.CleanSeries] = []
    rejected: list[dict] = []
    for seg_id in sorted(selected_ids):
        masked = quality.mask_low_likelihood(segment_poses[seg_id], tau)
        masked = _keep_parts(masked, parts)
        try:
            clean = series.clean_pose(masked, d_max=dmax, interp=interp, smooth=smooth)
        except DegenerateTrackError as exc:
            rejected.append({"segment": seg_id, "reason": str(exc)})
            continue
        cleaned.append(clean)
        if clean_dir is not None:
            with open(clean_dir / f"{seg_id}.csv", "w", encoding="utf-8") as fh:
                fh.write(series.clean_series_csv(clean))
    return cleaned, rejected


def write_selection_json(path: Path, selected_ids: list[str], tradeoff) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "selected": selected_ids,
                "tradeoff": {
                    "thresholds": tradeoff.thresholds.tolist(),
                    "kept_fraction": tradeoff.kept_fraction.tolist(),
                    "mean_missing_fraction": tradeoff.mean_missing_fraction.tolist(),
                    "max_missing_fraction": tradeoff.max_missing_fraction.tolist(),
                },
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")


def run_pipeline(config: PipelineConfig) -> RunReport:
    """Run every stage and write artifacts plus report.json under out_dir."""
    config.validate()
    detections_dir = Path(config.detections_dir)
    pose_dir = Path(config.pose_dir)
    if not detections_dir.is_dir():
        raise ConfigError(f"detections_dir {detections_dir} does not exist")
    if not pose_dir.is_dir():
        raise ConfigError(f"pose_dir {pose_dir} does not exist")

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport(parameters=asdict(config))
    spot_config = spotlight.SpotlightConfig(
        confidence_threshold=config.confidence,
        grace_delta=config.delta,
        epsilon=config.epsilon,
        min_frames=config.min_frames,
        frame_bounds=(config.frame_width, config.frame_height),
    )
    parts = config.part_list()

    # Stage 1: detections -> spotlight segments.
    t0 = time.perf_counter()
    all_segments, spot_counts = stage_spotlight(detections_dir, spot_config)
    spotlight.write_segments_jsonl(all_segments, out / "segments.jsonl")
    report.timings_ms["spotlight"] = round((time.perf_counter() - t0) * 1e3, 3)
    report.counts.update(spot_counts)

    # Stage 2: per-segment pose quality and selection.
    t0 = time.perf_counter()
    reports, selected_ids, tradeoff, segment_poses = stage_quality(
        all_segments, pose_dir, parts, config.tau, config.geomean_threshold
    )
    with open(out / "quality.csv", "w", encoding="utf-8") as fh:
        fh.write(quality.report_csv(reports, parts))
    write_selection_json(out / "selected.json", selected_ids, tradeoff)
    report.timings_ms["quality"] = round((time.perf_counter() - t0) * 1e3, 3)
    report.counts["segments_selected"] = len(selected_ids)

    # Stage 3: mask, smooth, interpolate, normalize.
    t0 = time.perf_counter()
    cleaned, rejected = stage_clean(
        segment_poses,
        selected_ids,
        parts,
        config.tau,
        config.dmax,
        config.interp,
        config.smooth,
        clean_dir=out / "clean",
    )
    with open(out / "rejected.json", "w", encoding="utf-8") as fh:
        json.dump({"rejected": rejected}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    report.timings_ms["series"] = round((time.perf_counter() - t0) * 1e3, 3)
    report.counts["segments_cleaned"] = len(cleaned)
    report.counts["segments_rejected"] = len(rejected)

    # Stage 4: behavioral windows.
    t0 = time.perf_counter()
    if not cleaned:
        raise ConfigError("no segments survived cleaning; nothing to window")
    dataset = windows.build_dataset(
        cleaned,
        omega=config.omega,
        stride=config.stride,
        cap=config.cap or None,
        seed=config.seed,
    )
    dataset.save(out)
    report.timings_ms["windows"] = round((time.perf_counter() - t0) * 1e3, 3)
    report.counts["windows_built"] = dataset.n_windows

    # Stage 5: embedding.
    t0 = time.perf_counter()
    if dataset.n_windows <= config.neighbors:
        raise ConfigError(
            f"embedding needs more windows ({dataset.n_windows}) than neighbors "
            f"({config.neighbors}); lower --neighbors or widen the corpus"
        )
    model = umap_fit(
        dataset.matrix,
        n_neighbors=config.neighbors,
        min_dist=config.min_dist,
        seed=config.seed,
        epochs=config.epochs,
        init=config.init,
        negative_rate=config.negative_rate,
        index=dataset.index,
    )
    model.save(out)
    report.timings_ms["embed"] = round((time.perf_counter() - t0) * 1e3, 3)
    report.counts["embedding_points"] = model.n_points

    if config.run_pca:
        t0 = time.perf_counter()
        pca = pca_fit(dataset.matrix, dims=config.pca_dims)
        coords = pca_transform(pca, dataset.matrix)
        np.ascontiguousarray(coords, dtype="<f4").tofile(out / "pca.f32")
        with open(out / "pca.json", "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "dims": config.pca_dims,
                    "explained_variance_fraction": pca.explained_variance_fraction.tolist(),
                },
                fh,
                indent=2,
                sort_keys=True,
            )
            fh.write("\n")
        report.timings_ms["pca"] = round((time.perf_counter() - t0) * 1e3, 3)

    report.save(out / "report.json")
    return report


def _keep_parts(pose: ingest.PoseSeries, parts: list[str]) -> ingest.PoseSeries:
    """Restrict a pose series to the configured bodyparts, in config order."""
    cols = [pose.part_index(p) for p in parts]
    return ingest.PoseSeries(
        video_id=pose.video_id,
        bodyparts=list(parts),
        xy=pose.xy[:, cols, :].copy(),
        likelihood=pose.likelihood[:, cols].copy(),
        scorer=pose.scorer,
        frame_index=pose.frame_index.copy(),
    )
