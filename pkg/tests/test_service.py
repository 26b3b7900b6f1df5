import math

import pytest
from fastapi.testclient import TestClient

from lyapcert.service import app

LOG2 = math.log(2.0)


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_healthz(client):
    body = client.get("/healthz").json()
    assert body["status"] == "ok"
    assert "version" in body


def test_run_endpoint(client):
    r = client.post("/run", json={
        "map": {"kind": "doubling"},
        "analysis": {"kind": "extremal", "base_resolution": 32},
        "seed": 0,
    })
    assert r.status_code == 200
    rep = r.json()
    assert rep["status"] == "ok"
    assert rep["results"]["min_estimate"]["value"] == pytest.approx(LOG2, abs=1e-12)
    assert rep["provenance"]["seed"] == 0


def test_orbit_endpoint(client):
    r = client.post("/orbit", json={
        "map": {"kind": "doubling"}, "start": [0.1], "direction": [1.0], "steps": 10,
    })
    assert r.status_code == 200
    assert r.json()["results"]["birkhoff_average"]["value"] == pytest.approx(LOG2, abs=1e-12)


def test_spectrum_endpoint(client):
    r = client.post("/spectrum", json={
        "map": {"kind": "toral_endomorphism", "matrix": [[2, 1], [1, 1]]},
        "start": [0.2, 0.7], "steps": 2000,
    })
    vals = [e["value"] for e in r.json()["results"]["exponents"]]
    lam = math.log((3 + math.sqrt(5)) / 2)
    assert vals[0] == pytest.approx(-lam, abs=1e-3)
    assert vals[1] == pytest.approx(lam, abs=1e-3)


def test_certify_endpoint_counterexample(client):
    r = client.post("/certify", json={
        "map": {"kind": "toral_endomorphism", "matrix": [[2, 1], [1, 1]]},
        "lambda": 0.1, "big_n": 10, "base_samples": 8, "direction_samples": 8,
    })
    rep = r.json()
    assert rep["status"] == "counterexample"
    assert rep["results"]["certification"]["outcome"] == "counterexample"


def test_fibred_endpoint(client):
    r = client.post("/fibred", json={
        "map": {"kind": "toral_endomorphism", "matrix": [[2, 1], [1, 1]]},
        "lambda": 0.9, "big_n": 1, "n_max": 100,
        "base_samples": 8, "direction_samples": 8, "subbundle": "unstable",
    })
    rep = r.json()
    assert rep["status"] == "ok"
    assert rep["results"]["fibred_certification"]["result"]["outcome"] == "certificate"


def test_critical_point_is_a_result(client):
    r = client.post("/run", json={
        "map": {"kind": "custom_polynomial", "coefficients": [0, 0, 1], "domain": [0.0, 1.0]},
        "analysis": {"kind": "orbit", "start": [0.0], "direction": [1.0], "steps": 3},
    })
    assert r.status_code == 200
    rep = r.json()
    assert rep["status"] == "critical_point"
    assert rep["error"]["type"] == "CriticalPointEncountered"


def test_validation_errors_are_422(client):
    r = client.post("/run", json={"map": {"kind": "doubling"}, "analysis": {"kind": "nope"}})
    assert r.status_code == 422
    r = client.post("/certify", json={
        "map": {"kind": "doubling"}, "lambda": -2.0,
    })
    assert r.status_code == 422
