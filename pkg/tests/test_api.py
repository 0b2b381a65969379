import pytest
from fastapi.testclient import TestClient

from netgof.core.env_config import config
from netgof.main import app


client = TestClient(app)

TRIANGLE = {"n": 3, "edges": [[0, 1], [1, 2], [2, 0]]}
K6 = {"n": 6, "edges": [[i, j] for i in range(6) for j in range(i + 1, 6)]}


def test_gof_triangle():
    response = client.post(f"{config.PROJECT_VERSION}/analysis/gof", json=TRIANGLE | {"k": 1})
    assert response.status_code == 200
    assert response.headers["X-Run-ID"]

    body = response.json()
    assert body["success"]
    assert body["run_id"] == response.headers["X-Run-ID"]
    assert [entry["model"] for entry in body["data"]["models"]] == ["SBM", "DCBM", "MMSBM", "DCMM"]


def test_gof_without_triangles_reports_failure():
    payload = {"n": 4, "edges": [[0, 1], [1, 2], [2, 3]], "k": 1}
    body = client.post(f"{config.PROJECT_VERSION}/analysis/gof", json=payload).json()
    assert body["success"] is False
    assert "no triangles" in body["message"]


def test_gof_out_of_range_edge():
    payload = {"n": 3, "edges": [[0, 1], [1, 7]], "k": 1}
    body = client.post(f"{config.PROJECT_VERSION}/analysis/gof", json=payload).json()
    assert body["success"] is False


def test_gof_validates_k():
    response = client.post(f"{config.PROJECT_VERSION}/analysis/gof", json=TRIANGLE | {"k": 0})
    assert response.status_code == 422


def test_estimate_k():
    body = client.post(f"{config.PROJECT_VERSION}/analysis/estimate-k", json=K6 | {"k_max": 3}).json()
    assert body["success"]
    assert body["data"]["k"] == 1


def test_schedule_simulation(tmp_path, monkeypatch):
    monkeypatch.setattr(config, "OUTPUT_DIR", str(tmp_path))
    payload = {
        "config": {"n": 50, "k": 1, "model": "SBM", "theta": {"law": "constant", "alpha_n": 0.4}, "replicates": 2},
        "assumed": ["SBM"],
    }
    response = client.post(f"{config.PROJECT_VERSION}/simulations", json=payload)
    assert response.status_code == 202

    body = response.json()
    run_dir = tmp_path / body["run_id"]
    assert body["data"]["output_dir"] == str(run_dir)
    # TestClient runs background tasks before returning
    assert (run_dir / "summary.json").exists()
    assert (run_dir / "replicates.csv").exists()


@pytest.mark.parametrize("assumed", [[], ["XYZ"]])
def test_schedule_simulation_rejects_bad_models(assumed):
    payload = {"config": {"n": 50, "k": 1, "model": "SBM", "theta": {"law": "constant"}}, "assumed": assumed}
    assert client.post(f"{config.PROJECT_VERSION}/simulations", json=payload).status_code == 422
