"""HTTP surface for the explorer UI.

Read artifacts load once at startup and never change; the label store is the
only mutable state (single writer).  Ensemble rendering runs as background
jobs with polling so queries stay responsive while frames are processed.
"""

from __future__ import annotations

import io
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from PIL import Image

from . import ingest
from .embed.projection import EmbeddingModel
from .explore import (
    EnsembleClip,
    LabelStore,
    RegionError,
    ensemble,
    query_region,
    region_from_json,
)
from .pipeline import source_video_of
from .windows import WindowDataset

STATIC_DIR = Path(__file__).parent / "static"


@dataclass
class EnsembleJob:
    job_id: str
    status: str = "pending"  # pending | running | done | error
    error: str = ""
    clip: EnsembleClip | None = None
    request: dict = field(default_factory=dict)


@dataclass
class SessionState:
    model: EmbeddingModel
    dataset: WindowDataset
    labels: LabelStore
    frames_root: Path | None = None

    @classmethod
    def load(
        cls,
        model_dir: str | Path,
        labels_path: str | Path = "labels.json",
        frames_dir: str | Path | None = None,
    ) -> "SessionState":
        directory = Path(model_dir)
        dataset = WindowDataset.load(directory)
        model = EmbeddingModel.load(directory, index=dataset.index, training_data=dataset.matrix)
        if model.n_points != dataset.n_windows:
            raise ValueError(
                f"model has {model.n_points} points but dataset has {dataset.n_windows}"
            )
        return cls(
            model=model,
            dataset=dataset,
            labels=LabelStore(labels_path),
            frames_root=Path(frames_dir) if frames_dir else None,
        )

    def frame_source(self, window_video_id: str) -> ingest.FrameStack | None:
        if self.frames_root is None:
            return None
        video = source_video_of(window_video_id)
        directory = self.frames_root / video
        if not directory.is_dir():
            return None
        indexed = sorted(
            int(p.stem) for p in directory.iterdir() if p.suffix in (".png", ".pgm")
        )
        if not indexed:
            return None
        return ingest.load_frames(directory, (indexed[0], indexed[-1]), video_id=video)


def create_app(session: SessionState, static_dir: Path | None = None) -> FastAPI:
    static_dir = STATIC_DIR if static_dir is None else Path(static_dir)
    app = FastAPI(title="homecage explorer", docs_url=None, redoc_url=None)
    jobs: dict[str, EnsembleJob] = {}
    jobs_lock = threading.Lock()
    executor = ThreadPoolExecutor(max_workers=2)

    @app.exception_handler(RegionError)
    async def _region_error(request: Request, exc: RegionError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/api/embedding")
    def embedding():
        coords = session.model.coordinates
        index = session.model.index
        return [
            {
                "id": i,
                "x": float(coords[i, 0]),
                "y": float(coords[i, 1]),
                "video": index[i][0],
                "start": index[i][1],
            }
            for i in range(session.model.n_points)
        ]

    @app.get("/api/meta")
    def meta():
        videos = sorted({video for video, _ in session.model.index})
        return {
            "n_points": session.model.n_points,
            "omega": session.dataset.omega,
            "stride": session.dataset.stride,
            "bodyparts": session.dataset.bodyparts,
            "n_neighbors": session.model.n_neighbors,
            "min_dist": session.model.min_dist,
            "videos": videos,
            "has_frames": session.frames_root is not None,
        }

    @app.post("/api/query")
    async def query(request: Request):
        payload = await request.json()
        region = region_from_json(payload)
        ids, counts = query_region(session.model, region)
        return {"ids": ids.tolist(), "counts": counts, "total": int(ids.size)}

    @app.get("/api/labels")
    def list_labels():
        return {"labels": [l.to_json() for l in session.labels.list()]}

    @app.post("/api/labels")
    async def create_label(request: Request):
        payload = await request.json()
        if "region" not in payload or "text" not in payload:
            raise HTTPException(status_code=400, detail="label needs region and text")
        region = region_from_json(payload["region"])
        label_id = session.labels.add(
            region, str(payload["text"]), str(payload.get("author", ""))
        )
        label = session.labels.get(label_id)
        return label.to_json()

    @app.delete("/api/labels/{label_id}")
    def delete_label(label_id: int):
        removed = session.labels.delete(label_id)
        if not removed:
            # Idempotent store-side; report the miss to the caller anyway.
            raise HTTPException(status_code=404, detail=f"no label {label_id}")
        return {"deleted": label_id}

    def _run_job(job: EnsembleJob, refs, omega, low, high, sigma, region):
        with jobs_lock:
            job.status = "running"
        try:
            clip = ensemble(
                refs,
                session.frame_source,
                omega=omega,
                low=low,
                high=high,
                blur_sigma=sigma,
                region=region,
            )
            with jobs_lock:
                job.clip = clip
                job.status = "done"
        except Exception as exc:  # job errors surface through polling
            with jobs_lock:
                job.status = "error"
                job.error = str(exc)

    @app.post("/api/ensemble")
    async def start_ensemble(request: Request):
        if session.frames_root is None:
            raise HTTPException(status_code=400, detail="service started without --frames")
        payload = await request.json()
        region = region_from_json(payload)
        low = float(payload.get("low", 50.0))
        high = float(payload.get("high", 150.0))
        sigma = float(payload.get("sigma", 1.4))
        ids, _ = query_region(session.model, region)
        if ids.size == 0:
            raise HTTPException(status_code=400, detail="region selects no windows")
        refs = [session.model.index[int(i)] for i in ids]
        job = EnsembleJob(job_id=uuid.uuid4().hex[:12], request=payload)
        with jobs_lock:
            jobs[job.job_id] = job
        executor.submit(
            _run_job, job, refs, session.dataset.omega, low, high, sigma, region
        )
        return {"job": job.job_id}

    def _get_job(job_id: str) -> EnsembleJob:
        with jobs_lock:
            job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no job {job_id}")
        return job

    @app.get("/api/ensemble/{job_id}")
    def ensemble_status(job_id: str):
        job = _get_job(job_id)
        body = {"job": job.job_id, "status": job.status}
        if job.status == "error":
            body["error"] = job.error
        if job.status == "done" and job.clip is not None:
            body["n_frames"] = len(job.clip)
            body["window_count"] = job.clip.window_count
            body["frames"] = [
                f"/api/ensemble/{job.job_id}/frame/{t}" for t in range(len(job.clip))
            ]
        return body

    @app.get("/api/ensemble/{job_id}/frame/{t}")
    def ensemble_frame(job_id: str, t: int):
        job = _get_job(job_id)
        if job.status != "done" or job.clip is None:
            raise HTTPException(status_code=409, detail=f"job {job_id} is {job.status}")
        if not (0 <= t < len(job.clip)):
            raise HTTPException(status_code=404, detail=f"frame {t} out of range")
        values = np.floor(job.clip.frames[t] * 255.0 + 0.5).astype(np.uint8)
        buffer = io.BytesIO()
        Image.fromarray(values, mode="L").save(buffer, format="PNG")
        return Response(content=buffer.getvalue(), media_type="image/png")

    if static_dir.is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    else:

        @app.get("/")
        def index():
            return {"service": "homecage explorer", "ui": "not built"}

    return app
