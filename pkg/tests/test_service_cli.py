"""Service endpoints and the thin CLI client."""

import json

import pytest
import yaml
from click.testing import CliRunner
from fastapi.testclient import TestClient

import railsim.scenarios as scenarios_module
from railsim.cli import main
from railsim.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


def test_healthz(client):
    body = client.get("/healthz").json()
    assert body["status"] == "ok"


def test_scenarios_endpoint_lists_all(client):
    ids = {s["id"] for s in client.get("/scenarios").json()}
    assert ids == {
        "bsg",
        "multirail-bsg",
        "cluster-bsg",
        "fusion-type1",
        "fusion-type2-boosted",
        "temporal-eraser",
        "compile-hadamard",
        "source-efficiency",
        "dna-run",
        "dna-phase-invariance",
    }


def test_run_endpoint_bsg(client):
    resp = client.post("/run", json={"scenario": "bsg", "seed": 1})
    assert resp.status_code == 200
    body = resp.json()
    assert body["schema"] == 1
    assert body["passed"] is True
    names = {c["name"] for c in body["checks"]}
    assert "herald-probability" in names


def test_run_endpoint_unknown_scenario(client):
    resp = client.post("/run", json={"scenario": "nope"})
    assert resp.status_code == 404


def test_run_endpoint_sweep_params(client):
    resp = client.post(
        "/run",
        json={"scenario": "multirail-bsg", "params": {"copies": 2}, "sweep": True},
    )
    body = resp.json()
    assert body["passed"] is True
    assert body["parameters"]["placements"] == 256


def test_transcript_endpoint_jsonl(client):
    config = {"nodes": 2, "groups": [{}], "measurements": {"g0.q1": "Z", "g0.q2": "Z"}}
    resp = client.post("/transcript", json={"config": config, "seed": 3})
    assert resp.status_code == 200
    lines = resp.text.strip().splitlines()
    assert lines
    for line in lines:
        msg = json.loads(line)
        assert set(msg) == {"round", "type", "node", "payload"}
    again = client.post("/transcript", json={"config": config, "seed": 3})
    assert again.text == resp.text


def test_verify_endpoint_quick_subset(client):
    resp = client.post("/verify", json={"quick": True})
    assert resp.status_code == 200
    body = resp.json()
    assert len(body["criteria"]) == 13
    assert body["all_passed"] is True


def test_cli_run_json_deterministic():
    runner = CliRunner()
    args = ["run", "bsg", "--seed", "9", "--out", "json"]
    r1 = runner.invoke(main, args)
    r2 = runner.invoke(main, args)
    assert r1.exit_code == 0
    d1, d2 = json.loads(r1.output), json.loads(r2.output)
    d1.pop("wall_time_s"), d2.pop("wall_time_s")
    assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)


def test_cli_unknown_scenario_exits_2():
    runner = CliRunner()
    result = runner.invoke(main, ["run", "definitely-not-a-scenario"])
    assert result.exit_code == 2


def test_cli_compile_hadamard_k3():
    runner = CliRunner()
    result = runner.invoke(main, ["run", "compile-hadamard", "--k", "3", "--out", "json"])
    assert result.exit_code == 0
    report = json.loads(result.output)
    by_name = {c["name"]: c for c in report["checks"]}
    assert by_name["depth"]["measured"] == "3"
    assert by_name["coupler-count"]["measured"] == "12"
    assert by_name["matrix-match"]["passed"]


def test_cli_multirail_sweep():
    runner = CliRunner()
    result = runner.invoke(main, ["run", "multirail-bsg", "--sweep", "--copies", "2", "--out", "json"])
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["parameters"]["placements"] == 256
    assert report["passed"]


def test_cli_transcript_roundtrip(tmp_path):
    config = tmp_path / "scenario.yaml"
    config.write_text(
        yaml.safe_dump(
            {"nodes": 2, "groups": [{}], "measurements": {"g0.q1": "Z", "g0.q2": "Z"}}
        )
    )
    out = tmp_path / "transcript.jsonl"
    runner = CliRunner()
    result = runner.invoke(
        main, ["transcript", "--config", str(config), "--seed", "4", "--out", str(out)]
    )
    assert result.exit_code == 0
    lines = out.read_text().strip().splitlines()
    assert all(set(json.loads(l)) == {"round", "type", "node", "payload"} for l in lines)


def test_corrupted_cluster_matrix_fails_check(monkeypatch):
    """Negative control: a broken steering matrix must fail the unitarity check."""
    import numpy as np

    bad = np.array(scenarios_module.CLUSTER_HERALD_UNITARY)
    bad[0, 0] = 0.9
    monkeypatch.setattr(scenarios_module, "CLUSTER_HERALD_UNITARY", bad)
    report = scenarios_module.run_scenario("cluster-bsg")
    by_name = {c.name: c for c in report.checks}
    assert not by_name["steering-unitarity"].passed
    assert not report.passed


def test_cli_run_exit_code_1_on_check_failure(monkeypatch):
    import numpy as np

    bad = np.array(scenarios_module.CLUSTER_HERALD_UNITARY)
    bad[0, 0] = 0.9
    monkeypatch.setattr(scenarios_module, "CLUSTER_HERALD_UNITARY", bad)
    runner = CliRunner()
    result = runner.invoke(main, ["run", "cluster-bsg"])
    assert result.exit_code == 1
