import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from framesem.service.app import create_app

from .paths import KB_DIR


@pytest.fixture()
def client():
    return TestClient(create_app())


def test_health_reports_kb_sizes(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert body["concepts"] > 50
    assert body["senses"] > 40
    assert body["shapes"] == 6
    assert body["scripts"] >= 1


def test_analyze_endpoint(client):
    resp = client.post("/analyze", json={"text": "Tony was watching a tiger.", "explain": True})
    assert resp.status_code == 200
    body = resp.json()
    assert len(body["readings"]) == 1
    reading = body["readings"][0]
    assert "VOLUNTARY-VISUAL-EVENT" in reading["mr"]
    assert reading["senses"] == ["watch-v1"]
    assert "episodic-mem HUMAN-#17" in reading["mr"]  # bundled memory anchor
    assert "[anchor]" in body["trace"]


def test_analyze_failure_is_422(client):
    resp = client.post("/analyze", json={"text": "zorch the blorp"})
    assert resp.status_code == 422
    assert "zorch" in resp.json()["detail"]


def test_generate_endpoint(client):
    mr = (KB_DIR / "mr" / "bicycle-color.mr").read_text()
    resp = client.post("/generate", json={"mr": mr})
    assert resp.status_code == 200
    assert resp.json()["sentence"] == "The bicycle is blue."


def test_generate_no_shape_is_422(client):
    resp = client.post("/generate", json={"mr": "instance ZORCHNESS-1\n  RANGE high\n"})
    assert resp.status_code == 422


def test_learn_endpoint_with_scenario(client):
    scenario = (KB_DIR / "scenarios" / "gas-tank.kb").read_text()
    resp = client.post("/learn", json={"scenario": scenario})
    assert resp.status_code == 200
    body = resp.json()
    assert body["learned"] is True
    assert body["name"] == "FILL-GAS-TANK"
    assert "HAS-EVENT-AS-PART" in body["script"]
    assert body["modules"]["persist"] == "done"
    assert body["describe_back"].startswith("Here's how you fill a gas tank.")


def test_learned_script_becomes_plannable(client):
    scenario = (KB_DIR / "scenarios" / "gas-tank.kb").read_text()
    client.post("/learn", json={"scenario": scenario})
    resp = client.post("/plan", json={"script": "FILL-GAS-TANK"})
    assert resp.status_code == 200
    assert resp.json()["steps"][0] == "REMOVE-#1"


def test_precedent_endpoints_change_ranking(client):
    text = "I need a cup of coffee."
    first = client.post("/analyze", json={"text": text}).json()
    assert first["readings"][0]["senses"] == ["need-v1"]
    resp = client.post("/precedents", json={"text": text, "reading": 1})
    assert resp.status_code == 200
    assert resp.json()["senses"] == ["need-v3"]
    second = client.post("/analyze", json={"text": text}).json()
    assert second["readings"][0]["senses"] == ["need-v3"]
    assert second["readings"][0]["precedent"] is True
    client.delete("/precedents")
    third = client.post("/analyze", json={"text": text}).json()
    assert third["readings"][0]["senses"] == ["need-v1"]


def test_consolidate_endpoint(client):
    resp = client.post("/consolidate", json={"min_count": 3})
    assert resp.status_code == 200
    assert resp.json()["habits"] == []  # bundled memory has no episodes


def test_plan_unknown_script_is_422(client):
    resp = client.post("/plan", json={"script": "NO-SUCH-SCRIPT"})
    assert resp.status_code == 422


def test_validate_endpoint_reports_known_gap(client):
    body = client.get("/validate").json()
    assert "grind-v1: unknown concept GRIND" in body["issues"]


def test_memory_endpoint_serializes_store(client):
    client.post("/analyze", json={"text": "Tony was watching a tiger."})
    body = client.get("/memory").json()
    assert "instance HUMAN-#17" in body["text"]
    assert "instance TIGER-#1" in body["text"]  # minted by the analysis


def test_memory_accumulates_across_requests(client):
    client.post("/analyze", json={"text": "Tony was watching a tiger."})
    first = client.get("/memory").json()["text"]
    client.post("/analyze", json={"text": "Tony was watching a tiger."})
    second = client.get("/memory").json()["text"]
    assert "TIGER-#2" in second and "TIGER-#2" not in first
