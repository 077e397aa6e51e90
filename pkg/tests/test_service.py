import json
import threading
import time
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from homecage.pipeline import PipelineConfig, run_pipeline
from homecage.service import SessionState, create_app
from homecage.synth import generate


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    corpus = tmp_path_factory.mktemp("corpus")
    generate("behavior-modes", seed=0, out_dir=corpus, frames=True)
    out = tmp_path_factory.mktemp("run")
    run_pipeline(
        PipelineConfig(
            detections_dir=str(corpus / "detections"),
            pose_dir=str(corpus / "pose"),
            out_dir=str(out),
            neighbors=30,
            epochs=80,
        )
    )
    return corpus, out


@pytest.fixture()
def client(artifacts, tmp_path):
    corpus, out = artifacts
    session = SessionState.load(out, tmp_path / "labels.json", corpus / "frames")
    return TestClient(create_app(session)), session


class TestEmbeddingEndpoints:
    def test_embedding_lists_all_points(self, client):
        http, session = client
        response = http.get("/api/embedding")
        assert response.status_code == 200
        points = response.json()
        assert len(points) == session.model.n_points
        first = points[0]
        assert set(first) == {"id", "x", "y", "video", "start"}

    def test_meta(self, client):
        http, session = client
        meta = http.get("/api/meta").json()
        assert meta["n_points"] == session.model.n_points
        assert meta["omega"] == 60
        assert meta["has_frames"] is True
        assert len(meta["videos"]) == 6

    def test_query_matches_library(self, client):
        http, session = client
        from homecage.explore import RectRegion, query_region

        body = {"rect": [-4.0, 4.0, -4.0, 4.0]}
        response = http.post("/api/query", json=body)
        assert response.status_code == 200
        payload = response.json()
        ids, counts = query_region(session.model, RectRegion(-4.0, 4.0, -4.0, 4.0))
        assert payload["ids"] == ids.tolist()
        assert payload["counts"] == counts

    def test_malformed_region_400(self, client):
        http, _ = client
        response = http.post("/api/query", json={"rect": [1, 2]})
        assert response.status_code == 400


class TestLabelEndpoints:
    def test_post_then_get_round_trip(self, client):
        http, _ = client
        created = http.post(
            "/api/labels",
            json={"region": {"disc": [0.0, 0.0, 2.0]}, "text": "drinking", "author": "me"},
        )
        assert created.status_code == 200
        label = created.json()
        listed = http.get("/api/labels").json()["labels"]
        assert label in listed

    def test_delete_unknown_404_store_unchanged(self, client):
        http, _ = client
        before = http.get("/api/labels").json()
        response = http.delete("/api/labels/99999")
        assert response.status_code == 404
        assert http.get("/api/labels").json() == before

    def test_missing_fields_400(self, client):
        http, _ = client
        assert http.post("/api/labels", json={"text": "x"}).status_code == 400

    def test_concurrent_writers_all_land(self, client):
        http, session = client

        def write(i):
            http.post(
                "/api/labels",
                json={"region": {"disc": [float(i), 0.0, 1.0]}, "text": f"l{i}"},
            )

        threads = [threading.Thread(target=write, args=(i,)) for i in range(20)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        labels = http.get("/api/labels").json()["labels"]
        assert len(labels) >= 20
        ids = [l["id"] for l in labels]
        assert len(ids) == len(set(ids))
        # the persisted document matches the served state
        stored = json.loads(Path(session.labels.path).read_text())
        assert [l["id"] for l in stored["labels"]] == ids


class TestEnsembleJobs:
    def wait_done(self, http, job_id, timeout=60.0):
        deadline = time.time() + timeout
        while time.time() < deadline:
            body = http.get(f"/api/ensemble/{job_id}").json()
            if body["status"] in ("done", "error"):
                return body
            time.sleep(0.1)
        raise AssertionError("job did not finish in time")

    def test_job_lifecycle_and_frames(self, client):
        http, session = client
        # center the disc on a window from the video that has frames
        target = next(
            i for i, (v, _) in enumerate(session.model.index) if v.startswith("modes00")
        )
        cx, cy = (float(v) for v in session.model.coordinates[target])
        started = http.post(
            "/api/ensemble",
            json={"disc": [cx, cy, 0.3], "low": 20.0, "high": 60.0},
        )
        assert started.status_code == 200
        job_id = started.json()["job"]
        body = self.wait_done(http, job_id)
        assert body["status"] == "done", body
        assert body["n_frames"] == 60
        assert body["window_count"] >= 1
        frame = http.get(f"/api/ensemble/{job_id}/frame/0")
        assert frame.status_code == 200
        assert frame.headers["content-type"] == "image/png"
        assert frame.content[:8] == b"\x89PNG\r\n\x1a\n"

    def test_unknown_job_404(self, client):
        http, _ = client
        assert http.get("/api/ensemble/nothere").status_code == 404

    def test_empty_region_400(self, client):
        http, _ = client
        response = http.post("/api/ensemble", json={"disc": [1e6, 1e6, 0.01]})
        assert response.status_code == 400

    def test_frame_before_done_409(self, client):
        http, session = client
        target = next(
            i for i, (v, _) in enumerate(session.model.index) if v.startswith("modes00")
        )
        cx, cy = (float(v) for v in session.model.coordinates[target])
        job_id = http.post(
            "/api/ensemble", json={"disc": [cx, cy, 0.3]}
        ).json()["job"]
        # immediately probing a frame may race completion; accept 409 or 200
        response = http.get(f"/api/ensemble/{job_id}/frame/0")
        assert response.status_code in (200, 409)
        self.wait_done(http, job_id)


class TestReadOnlyContract:
    def test_queries_and_labels_never_touch_artifacts(self, artifacts, tmp_path):
        _, out = artifacts
        names = ["embedding.f32", "windows.f32", "windows.index.csv", "embedding.json"]
        before = {n: (out / n).read_bytes() for n in names}
        session = SessionState.load(out, tmp_path / "labels.json")
        http = TestClient(create_app(session))
        http.post("/api/query", json={"rect": [-1.0, 1.0, -1.0, 1.0]})
        http.post(
            "/api/labels", json={"region": {"disc": [0.0, 0.0, 1.0]}, "text": "x"}
        )
        for n in names:
            assert (out / n).read_bytes() == before[n]
        assert (tmp_path / "labels.json").exists()  # the one mutable artifact

    def test_queries_answer_while_ensemble_runs(self, client):
        http, session = client
        target = next(
            i for i, (v, _) in enumerate(session.model.index) if v.startswith("modes00")
        )
        cx, cy = (float(v) for v in session.model.coordinates[target])
        job_id = http.post("/api/ensemble", json={"disc": [cx, cy, 0.4]}).json()["job"]
        t0 = time.time()
        response = http.post("/api/query", json={"rect": [-2.0, 2.0, -2.0, 2.0]})
        elapsed = time.time() - t0
        assert response.status_code == 200
        assert elapsed < 1.0  # not serialized behind the running job
        # drain the job so the module teardown is clean
        deadline = time.time() + 60
        while time.time() < deadline:
            if http.get(f"/api/ensemble/{job_id}").json()["status"] in ("done", "error"):
                break
            time.sleep(0.1)


class TestSessionState:
    def test_mismatched_artifacts_rejected(self, artifacts, tmp_path):
        _, out = artifacts
        broken = tmp_path / "broken"
        broken.mkdir()
        for name in (
            "windows.f32",
            "windows.index.csv",
            "windows.meta.json",
            "embedding.json",
        ):
            (broken / name).write_bytes((out / name).read_bytes())
        coords = np.fromfile(out / "embedding.f32", dtype="<f4")
        coords[:-2].tofile(broken / "embedding.f32")  # drop one point
        with pytest.raises(Exception):
            SessionState.load(broken, tmp_path / "labels.json")

    def test_root_without_ui_build(self, client):
        http, _ = client
        response = http.get("/")
        assert response.status_code == 200
