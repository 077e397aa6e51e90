"""Command-line entrypoint.

One subcommand per stage plus `run` for the orchestrated pipeline; exit
code 0 on success, 2 on validation errors (bad parameters, missing inputs),
1 on runtime failures.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import ingest, pipeline, quality, series, spotlight, synth, windows
from .embed import (
    EmbeddingModel,
    pca_fit,
    pca_transform,
    sweep as run_sweep,
    umap_fit,
)
from .embed.sweep import sweep_csv
from .explore import (
    DiscRegion,
    RectRegion,
    ensemble as build_ensemble,
    export_clip,
    query_region,
)
from .pipeline import ConfigError

VALIDATION_EXIT = 2
RUNTIME_EXIT = 1


def _fail_validation(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(VALIDATION_EXIT)


@click.group()
def main():
    """Behavior pipeline: detections to spotlight tracks to pose cleaning to
    windows to a 2-D embedding, with query/label/ensemble exploration."""


@main.command("synth")
@click.option("--profile", type=click.Choice(synth.PROFILES), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--fps", type=float, default=25.0, show_default=True)
@click.option("--frames", is_flag=True, help="Also render camera frames where supported.")
def synth_cmd(profile, seed, out_dir, fps, frames):
    """Generate a synthetic corpus with a truth.json sidecar."""
    truth = synth.generate(profile, seed=seed, out_dir=out_dir, fps=fps, frames=frames)
    click.echo(f"wrote {profile} corpus to {out_dir} ({len(truth)} truth keys)")


@main.command("spotlight")
@click.option("--detections", type=click.Path(exists=True), required=True,
              help="One detection JSONL file or a directory of them.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--confidence", type=float, default=0.75, show_default=True)
@click.option("--delta", type=float, default=50.0, show_default=True)
@click.option("--epsilon", type=float, default=50.0, show_default=True)
@click.option("--min-frames", type=int, default=50, show_default=True)
@click.option("--frame-width", type=float, default=1280.0, show_default=True)
@click.option("--frame-height", type=float, default=720.0, show_default=True)
def spotlight_cmd(detections, out_path, confidence, delta, epsilon, min_frames, frame_width, frame_height):
    """Extract spotlight segments from detection streams."""
    try:
        config = spotlight.SpotlightConfig(
            confidence_threshold=confidence,
            grace_delta=delta,
            epsilon=epsilon,
            min_frames=min_frames,
            frame_bounds=(frame_width, frame_height),
        )
    except ValueError as exc:
        _fail_validation(str(exc))
    source = Path(detections)
    if source.is_dir():
        segments, _ = pipeline.stage_spotlight(source, config)
    else:
        det = ingest.parse_detections(
            source.read_text(encoding="utf-8"), video_id=source.stem
        )
        segments = spotlight.find_segments(det, config)
    spotlight.write_segments_jsonl(segments, out_path)
    click.echo(f"{len(segments)} segments -> {out_path}")


@main.command("quality")
@click.option("--pose", "pose_paths", type=click.Path(exists=True), multiple=True,
              help="Standalone mode: score whole pose tables.")
@click.option("--segments", "segments_path", type=click.Path(exists=True), default=None,
              help="Stage mode: score per-segment slices of --pose-dir tables.")
@click.option("--pose-dir", type=click.Path(exists=True), default=None)
@click.option("--tau", type=float, default=0.5, show_default=True)
@click.option("--geomean-threshold", type=float, default=0.3, show_default=True)
@click.option("--parts", default=",".join(quality.DEFAULT_PARTS), show_default=True)
@click.option("--out", "out_path", type=click.Path(), default="quality.csv", show_default=True)
@click.option("--selected-out", type=click.Path(), default=None)
def quality_cmd(pose_paths, segments_path, pose_dir, tau, geomean_threshold, parts, out_path, selected_out):
    """Score pose tables and select those above the geomean threshold."""
    if not (0.0 <= geomean_threshold <= 1.0):
        _fail_validation(f"geomean threshold {geomean_threshold} outside [0, 1]")
    if not (0.0 <= tau <= 1.0):
        _fail_validation(f"tau {tau} outside [0, 1]")
    part_list = [p.strip() for p in parts.split(",") if p.strip()]
    if segments_path is not None:
        if pose_dir is None:
            _fail_validation("--segments requires --pose-dir")
        segments = spotlight.read_segments_jsonl(segments_path)
        reports, selected, tradeoff, _ = pipeline.stage_quality(
            segments, Path(pose_dir), part_list, tau, geomean_threshold
        )
        if selected_out:
            pipeline.write_selection_json(Path(selected_out), selected, tradeoff)
    else:
        if not pose_paths:
            _fail_validation("provide --pose files or --segments with --pose-dir")
        reports = []
        for path in pose_paths:
            pose = ingest.parse_pose_csv(
                Path(path).read_text(encoding="utf-8"), video_id=Path(path).stem
            )
            reports.append(quality.compute_report(pose, part_list, tau))
        selected, tradeoff = quality.select_videos(reports, geomean_threshold)
        if selected_out:
            pipeline.write_selection_json(Path(selected_out), selected, tradeoff)
    Path(out_path).write_text(quality.report_csv(reports, part_list), encoding="utf-8")
    click.echo(json.dumps({"selected": selected}))


@main.command("smooth")
@click.option("--pose", "pose_path", type=click.Path(exists=True), default=None,
              help="Standalone mode: clean one whole pose table.")
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--segments", "segments_path", type=click.Path(exists=True), default=None,
              help="Stage mode: clean per-segment slices of --pose-dir tables.")
@click.option("--pose-dir", type=click.Path(exists=True), default=None)
@click.option("--selected", "selected_path", type=click.Path(exists=True), default=None,
              help="selected.json restricting which segments to clean.")
@click.option("--out-dir", type=click.Path(), default=None)
@click.option("--tau", type=float, default=0.5, show_default=True)
@click.option("--dmax", type=float, default=10.0, show_default=True)
@click.option("--interp", type=click.Choice(["cubic", "linear"]), default="cubic", show_default=True)
@click.option("--no-smooth", is_flag=True, help="Skip differential smoothing.")
@click.option("--parts", default=",".join(quality.DEFAULT_PARTS), show_default=True)
def smooth_cmd(pose_path, out_path, segments_path, pose_dir, selected_path, out_dir,
               tau, dmax, interp, no_smooth, parts):
    """Mask, smooth, interpolate, and centroid-normalize pose tables."""
    part_list = [p.strip() for p in parts.split(",") if p.strip()]
    if segments_path is not None:
        if pose_dir is None or out_dir is None:
            _fail_validation("--segments requires --pose-dir and --out-dir")
        segments = spotlight.read_segments_jsonl(segments_path)
        _, selected, _, segment_poses = pipeline.stage_quality(
            segments, Path(pose_dir), part_list, tau, geomean_threshold=0.0
        )
        if selected_path:
            selected = json.loads(Path(selected_path).read_text(encoding="utf-8"))["selected"]
        cleaned, rejected = pipeline.stage_clean(
            segment_poses, selected, part_list, tau, dmax, interp,
            smooth=not no_smooth, clean_dir=Path(out_dir),
        )
        click.echo(f"{len(cleaned)} cleaned, {len(rejected)} rejected -> {out_dir}")
        return
    if pose_path is None or out_path is None:
        _fail_validation("provide --pose/--out or --segments with --pose-dir/--out-dir")
    pose = ingest.parse_pose_csv(
        Path(pose_path).read_text(encoding="utf-8"), video_id=Path(pose_path).stem
    )
    masked = quality.mask_low_likelihood(pose, tau)
    try:
        clean = series.clean_pose(masked, d_max=dmax, interp=interp, smooth=not no_smooth)
    except series.DegenerateTrackError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(RUNTIME_EXIT)
    Path(out_path).write_text(series.clean_series_csv(clean), encoding="utf-8")
    click.echo(f"{clean.n_frames} frames -> {out_path}")


@main.command("windows")
@click.option("--clean-dir", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--omega", type=int, default=60, show_default=True)
@click.option("--stride", type=int, default=1, show_default=True)
@click.option("--cap", type=int, default=0, show_default=True, help="0 disables subsampling.")
@click.option("--seed", type=int, default=7, show_default=True)
def windows_cmd(clean_dir, out_dir, omega, stride, cap, seed):
    """Build the window dataset from a directory of clean series CSVs."""
    if omega < 1 or stride < 1:
        _fail_validation("omega and stride must be >= 1")
    videos = []
    for path in sorted(Path(clean_dir).glob("*.csv")):
        videos.append(
            series.parse_clean_series_csv(path.read_text(encoding="utf-8"), path.stem)
        )
    if not videos:
        _fail_validation(f"no clean series CSVs in {clean_dir}")
    dataset = windows.build_dataset(videos, omega=omega, stride=stride, cap=cap or None, seed=seed)
    dataset.save(out_dir)
    click.echo(f"{dataset.n_windows} windows -> {out_dir}")


@main.command("umap")
@click.option("--windows", "windows_dir", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--neighbors", type=int, default=200, show_default=True)
@click.option("--min-dist", type=float, default=0.0, show_default=True)
@click.option("--epochs", type=int, default=500, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--init", type=click.Choice(["spectral", "random"]), default="spectral", show_default=True)
@click.option("--parallel", is_flag=True, help="Racy multi-threaded layout (non-deterministic).")
def umap_cmd(windows_dir, out_dir, neighbors, min_dist, epochs, seed, init, parallel):
    """Fit the 2-D manifold projection of a window dataset."""
    dataset = windows.WindowDataset.load(windows_dir)
    if neighbors >= dataset.n_windows:
        _fail_validation(
            f"neighbors={neighbors} must be < dataset size {dataset.n_windows}"
        )
    model = umap_fit(
        dataset.matrix,
        n_neighbors=neighbors,
        min_dist=min_dist,
        seed=seed,
        epochs=epochs,
        init=init,
        index=dataset.index,
        parallel=parallel,
    )
    model.save(out_dir)
    click.echo(f"{model.n_points} points -> {out_dir}")


@main.command("pca")
@click.option("--windows", "windows_dir", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--dims", type=int, default=2, show_default=True)
def pca_cmd(windows_dir, out_dir, dims):
    """Project a window dataset onto its principal components."""
    dataset = windows.WindowDataset.load(windows_dir)
    model = pca_fit(dataset.matrix, dims=dims)
    coords = pca_transform(model, dataset.matrix)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.ascontiguousarray(coords, dtype="<f4").tofile(out / "pca.f32")
    with open(out / "pca.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "dims": dims,
                "explained_variance_fraction": model.explained_variance_fraction.tolist(),
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    click.echo(f"pca projection -> {out_dir}")


@main.command("sweep")
@click.option("--train", "train_dir", type=click.Path(exists=True), required=True)
@click.option("--val", "val_dir", type=click.Path(exists=True), required=True)
@click.option("--neighbors", default="15,50,200", show_default=True)
@click.option("--min-dist", "min_dists", default="0.0,0.1,0.5", show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--epochs", type=int, default=200, show_default=True)
@click.option("--metric", type=click.Choice(["silhouette", "trustworthiness"]), default="silhouette", show_default=True)
@click.option("--out", "out_path", type=click.Path(), default="sweep.csv", show_default=True)
def sweep_cmd(train_dir, val_dir, neighbors, min_dists, seed, epochs, metric, out_path):
    """Grid-search neighbors and min_dist, scoring validation transforms."""
    train = windows.WindowDataset.load(train_dir)
    val = windows.WindowDataset.load(val_dir)
    neighbor_grid = [int(v) for v in neighbors.split(",") if v.strip()]
    min_dist_grid = [float(v) for v in min_dists.split(",") if v.strip()]
    if any(n < 1 or n > 200 for n in neighbor_grid):
        _fail_validation("neighbor grid must lie in [1, 200]")
    if any(not 0.0 <= m <= 1.0 for m in min_dist_grid):
        _fail_validation("min_dist grid must lie in [0, 1]")
    runs = run_sweep(
        train.matrix,
        val.matrix,
        neighbor_grid,
        min_dist_grid,
        seed=seed,
        epochs=epochs,
        metric=metric,
    )
    Path(out_path).write_text(sweep_csv(runs), encoding="utf-8")
    best = runs[0]
    click.echo(
        f"best: neighbors={best.n_neighbors} min_dist={best.min_dist} "
        f"{best.metric}={best.score:.4f} -> {out_path}"
    )


def _parse_region(rect: str | None, disc: str | None):
    if (rect is None) == (disc is None):
        _fail_validation("provide exactly one of --rect or --disc")
    try:
        if rect is not None:
            values = [float(v) for v in rect.split(",")]
            if len(values) != 4:
                raise ValueError("rect needs x_min,x_max,y_min,y_max")
            return RectRegion(*values)
        values = [float(v) for v in disc.split(",")]
        if len(values) != 3:
            raise ValueError("disc needs cx,cy,radius")
        return DiscRegion(*values)
    except ValueError as exc:
        _fail_validation(str(exc))


def _load_model(model_dir: str) -> EmbeddingModel:
    directory = Path(model_dir)
    dataset = windows.WindowDataset.load(directory)
    return EmbeddingModel.load(directory, index=dataset.index, training_data=dataset.matrix)


@main.command("query")
@click.option("--model", "model_dir", type=click.Path(exists=True), required=True)
@click.option("--rect", default=None, help="x_min,x_max,y_min,y_max")
@click.option("--disc", default=None, help="cx,cy,radius")
def query_cmd(model_dir, rect, disc):
    """List window ids inside an embedding-space region."""
    region = _parse_region(rect, disc)
    model = _load_model(model_dir)
    ids, counts = query_region(model, region)
    click.echo(json.dumps({"ids": ids.tolist(), "counts": counts, "total": int(ids.size)}))


@main.command("ensemble")
@click.option("--model", "model_dir", type=click.Path(exists=True), required=True)
@click.option("--rect", default=None)
@click.option("--disc", default=None)
@click.option("--frames-dir", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--low", type=float, default=50.0, show_default=True)
@click.option("--high", type=float, default=150.0, show_default=True)
@click.option("--sigma", type=float, default=1.4, show_default=True)
def ensemble_cmd(model_dir, rect, disc, frames_dir, out_dir, low, high, sigma):
    """Render the edge-ensemble clip for all windows inside a region."""
    region = _parse_region(rect, disc)
    model = _load_model(model_dir)
    ids, _ = query_region(model, region)
    if ids.size == 0:
        click.echo("error: region selects no windows", err=True)
        sys.exit(RUNTIME_EXIT)
    refs = [model.index[int(i)] for i in ids]
    frames_root = Path(frames_dir)

    def frame_source(window_video_id: str):
        video = pipeline.source_video_of(window_video_id)
        directory = frames_root / video
        if not directory.is_dir():
            return None
        indexed = sorted(int(p.stem) for p in directory.glob("*.png"))
        if not indexed:
            return None
        return ingest.load_frames(directory, (indexed[0], indexed[-1]), video_id=video)

    dataset_meta = windows.WindowDataset.load(Path(model_dir))
    try:
        clip = build_ensemble(
            refs,
            frame_source,
            omega=dataset_meta.omega,
            low=low,
            high=high,
            blur_sigma=sigma,
            region=region,
        )
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(RUNTIME_EXIT)
    export_clip(clip, out_dir)
    click.echo(f"{clip.window_count} windows, {len(clip)} frames -> {out_dir}")


@main.command("serve")
@click.option("--model", "model_dir", type=click.Path(exists=True), required=True)
@click.option("--labels", "labels_path", type=click.Path(), default="labels.json", show_default=True)
@click.option("--frames", "frames_dir", type=click.Path(), default=None)
@click.option("--bind", default="127.0.0.1:8080", show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(), default=None,
              help="Alternative UI bundle directory (default: packaged build).")
def serve_cmd(model_dir, labels_path, frames_dir, bind, ui_dir):
    """Serve the explorer API and UI over HTTP."""
    import uvicorn

    from .service import SessionState, create_app

    host, _, port = bind.partition(":")
    session = SessionState.load(model_dir, labels_path, frames_dir)
    app = create_app(session, static_dir=Path(ui_dir) if ui_dir else None)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080), log_level="info")


@main.command("report")
@click.option("--run", "run_dir", type=click.Path(exists=True), required=True)
def report_cmd(run_dir):
    """Print the report.json of a pipeline run."""
    path = Path(run_dir) / "report.json"
    if not path.exists():
        _fail_validation(f"{path} does not exist")
    click.echo(path.read_text(encoding="utf-8").rstrip())


@main.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--detections-dir", default=None)
@click.option("--pose-dir", default=None)
@click.option("--out-dir", default=None)
@click.option("--confidence", type=float, default=None)
@click.option("--delta", type=float, default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--min-frames", "min_frames", type=int, default=None)
@click.option("--tau", type=float, default=None)
@click.option("--geomean-threshold", "geomean_threshold", type=float, default=None)
@click.option("--parts", default=None)
@click.option("--dmax", type=float, default=None)
@click.option("--interp", type=click.Choice(["cubic", "linear"]), default=None)
@click.option("--omega", type=int, default=None)
@click.option("--stride", type=int, default=None)
@click.option("--cap", type=int, default=None)
@click.option("--neighbors", type=int, default=None)
@click.option("--min-dist", "min_dist", type=float, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--run-pca", "run_pca", is_flag=True, default=None)
def run_cmd(config_path, **overrides):
    """Run the full pipeline from a config file with flag overrides."""
    try:
        file_values = (
            pipeline.parse_config_text(Path(config_path).read_text(encoding="utf-8"))
            if config_path
            else {}
        )
        config = pipeline.build_config(file_values, overrides)
        report = pipeline.run_pipeline(config)
    except ConfigError as exc:
        _fail_validation(str(exc))
    except (ValueError, FileNotFoundError, ingest.FormatError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(RUNTIME_EXIT)
    click.echo(json.dumps({"counts": report.counts}))


if __name__ == "__main__":
    main()
