"""Secondary (explorer UI) acceptance checks that run against the service.

The UI displays service responses verbatim (its own unit suite pins that
pass-through), so member-id equivalence reduces to API == CLI on identical
artifacts, exercised here end to end.  The UI bundle itself is built and
tested with npm under frontend/.
"""

import json

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from homecage.cli import main
from homecage.pipeline import PipelineConfig, run_pipeline
from homecage.service import SessionState, create_app
from homecage.synth import generate


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    corpus = tmp_path_factory.mktemp("corpus")
    generate("behavior-modes", seed=0, out_dir=corpus)
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
    return out


class TestUiCliEquivalence:
    def test_twenty_random_brushes(self, run_dir, tmp_path):
        session = SessionState.load(run_dir, tmp_path / "labels.json")
        http = TestClient(create_app(session))
        runner = CliRunner()
        coords = session.model.coordinates
        lo = coords.min(axis=0)
        hi = coords.max(axis=0)
        rng = np.random.default_rng(2026)

        for _ in range(20):
            x0, y0 = rng.uniform(lo, hi)
            x1 = float(rng.uniform(x0, hi[0])) + 1e-6
            y1 = float(rng.uniform(y0, hi[1])) + 1e-6
            api = http.post("/api/query", json={"rect": [x0, x1, y0, y1]}).json()
            result = runner.invoke(
                main,
                ["query", "--model", str(run_dir), "--rect", f"{x0},{x1},{y0},{y1}"],
            )
            assert result.exit_code == 0, result.output
            cli = json.loads(result.output)
            assert api["ids"] == cli["ids"]
            assert api["total"] == cli["total"]
            assert api["counts"] == cli["counts"]


class TestLabelPersistenceAcrossRestart:
    def test_create_delete_survive_restart_and_match_disk(self, run_dir, tmp_path):
        labels_path = tmp_path / "labels.json"
        session = SessionState.load(run_dir, labels_path)
        http = TestClient(create_app(session))

        first = http.post(
            "/api/labels",
            json={"region": {"disc": [0.0, 0.0, 1.0]}, "text": "drinking"},
        ).json()
        second = http.post(
            "/api/labels",
            json={"region": {"rect": [1.0, 2.0, 1.0, 2.0]}, "text": "grooming"},
        ).json()
        http.delete(f"/api/labels/{first['id']}")

        # simulate service restart: fresh session over the same labels file
        restarted = SessionState.load(run_dir, labels_path)
        http2 = TestClient(create_app(restarted))
        listed = http2.get("/api/labels").json()["labels"]
        assert [l["id"] for l in listed] == [second["id"]]
        assert listed[0]["text"] == "grooming"

        on_disk = json.loads(labels_path.read_text())
        assert on_disk["labels"] == listed
