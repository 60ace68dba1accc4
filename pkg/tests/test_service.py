import numpy as np
import pytest
from fastapi.testclient import TestClient

from lieaffine.catalog import (gl2_linear, heis3_invariant, r2_bilinear,
                               so3_invariant)
from lieaffine.conjugation import determinant_target_system
from lieaffine.service.app import create_app
from lieaffine.sysdsl import system_to_text

GL2 = system_to_text(gl2_linear())
GL2_TRACEFUL = system_to_text(gl2_linear(traceful=True))
NONCOMMUTING = """group glplus dim 2
field X0 = inner [0,1;0,0]
field Y0 = zero
field X1 = inner [0,0;1,0]
field Y1 = zero
drift X0 + Y0
control 1: X1 + Y1
"""


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_check_reports_hypotheses(client):
    r = client.post("/check", json={"system": GL2})
    assert r.status_code == 200
    body = r.json()
    assert body["commuting"] is True
    assert body["inner"] is True
    assert body["n"] == 2 and body["dim"] == 4 and body["m"] == 1


def test_check_noncommuting_still_200(client):
    r = client.post("/check", json={"system": NONCOMMUTING})
    assert r.status_code == 200
    body = r.json()
    assert body["commuting"] is False
    assert body["messages"]


def test_simulate_csv_schema(client):
    r = client.post("/simulate", json={"system": GL2, "signal": "0.5:1.0;0.5:-1.0",
                                       "samples_per_segment": 2})
    assert r.status_code == 200
    body = r.json()
    assert body["method"] == "closed_inner"
    assert body["header"] == ["t", "e11", "e12", "e21", "e22"]
    assert len(body["times"]) == 5
    lines = body["csv"].strip().split("\n")
    assert lines[0] == "t,e11,e12,e21,e22"
    assert len(lines) == 6
    assert lines[1].startswith("0.0,")
    ts = [float(ln.split(",")[0]) for ln in lines[1:]]
    assert ts == sorted(ts)


def test_simulate_with_start_point(client):
    r = client.post("/simulate", json={"system": GL2, "signal": "0.5:1.0",
                                       "start": [[2.0, 0.0], [0.0, 0.5]]})
    assert r.status_code == 200
    first = r.json()["states"][0]
    assert np.allclose(first, [2.0, 0.0, 0.0, 0.5])


def test_simulate_bad_start_is_422(client):
    r = client.post("/simulate", json={"system": GL2, "signal": "0.5:1.0",
                                       "start": [[-1.0, 0.0], [0.0, 1.0]]})
    assert r.status_code in (409, 422, 500)
    # a negative-determinant start never silently succeeds
    assert "kind" in r.json()


def test_simulate_parse_error_payload(client):
    r = client.post("/simulate", json={"system": "group glplus dim 2\nfield X = inner [1,0;0,oops]\ndrift X + X\n",
                                       "signal": "0.5:1.0"})
    assert r.status_code == 422
    body = r.json()
    assert body["kind"] == "parse"
    assert body["errors"]
    for err in body["errors"]:
        assert {"kind", "message", "line", "col", "length"} <= set(err)
        assert err["line"] >= 1 and err["col"] >= 1


def test_simulate_signal_arity_is_usage_error(client):
    r = client.post("/simulate", json={"system": GL2, "signal": "0.5:1.0,2.0"})
    assert r.status_code == 422
    assert r.json()["kind"] == "usage"


def test_simulate_noncommuting_is_hypothesis_error(client):
    r = client.post("/simulate", json={"system": NONCOMMUTING, "signal": "0.5:1.0"})
    assert r.status_code == 409
    assert r.json()["kind"] == "hypothesis"


def test_simulate_force_overrides(client):
    r = client.post("/simulate", json={"system": NONCOMMUTING, "signal": "0.5:1.0",
                                       "force": True, "method": "product"})
    assert r.status_code == 200
    body = r.json()
    assert body["forced"] is True
    assert body["method"] == "product_formula"


def test_simulate_numerical_blowup_is_500(client):
    r = client.post("/simulate", json={"system": GL2, "signal": "500:1.0",
                                       "method": "rk4", "dt": 0.5})
    assert r.status_code == 500
    assert r.json()["kind"] == "numerical"


def test_simulate_rejects_unknown_method(client):
    r = client.post("/simulate", json={"system": GL2, "signal": "0.5:1.0",
                                       "method": "simpson"})
    assert r.status_code == 422


def test_compare_routes(client):
    r = client.post("/compare", json={"system": GL2, "signal": "0.5:1.0;0.25:-0.5"})
    assert r.status_code == 200
    body = r.json()
    assert body["methods"] == ["product", "closed", "rk4"]
    assert set(body["distances"]) == {"product_vs_closed", "product_vs_rk4", "closed_vs_rk4"}
    assert body["within"] is True
    assert body["tol"] == 1e-6


def test_compare_skips_closed_when_not_inner(client):
    r = client.post("/compare", json={"system": system_to_text(r2_bilinear()),
                                      "signal": "0.5:0.7"})
    assert r.status_code == 200
    body = r.json()
    assert body["methods"] == ["product", "rk4"]
    assert set(body["distances"]) == {"product_vs_rk4"}


def test_reach_deterministic(client):
    req = {"system": GL2, "horizon": 1.0, "n_samples": 6, "seed": 7}
    a = client.post("/reach", json=req)
    b = client.post("/reach", json=req)
    assert a.status_code == b.status_code == 200
    assert a.json()["csv"] == b.json()["csv"]
    assert a.json()["count"] == 6
    c = client.post("/reach", json={**req, "seed": 8})
    assert c.json()["csv"] != a.json()["csv"]
    header = a.json()["csv"].split("\n", 1)[0]
    assert header == "index,e11,e12,e21,e22"


def test_reach_requires_bounded_controls(client):
    unbounded = GL2.replace("controlset box -1.0 1.0\n", "")
    r = client.post("/reach", json={"system": unbounded, "horizon": 1.0})
    assert r.status_code == 422
    assert r.json()["kind"] == "usage"


def test_conjugate_det(client):
    tgt = system_to_text(determinant_target_system(gl2_linear(traceful=True)))
    r = client.post("/conjugate", json={"system": GL2_TRACEFUL, "target": tgt,
                                        "hom": "det", "signal": "0.5:1.0;0.5:-1.0"})
    assert r.status_code == 200
    body = r.json()
    assert body["pass"] is True
    assert body["anomaly"] is False
    assert set(body["conditions"]) == {"trajectory", "flow_conjugation", "invariant_parts"}
    for cond in body["conditions"].values():
        assert cond["pass"] is True


def test_conjugate_identity(client):
    r = client.post("/conjugate", json={"system": GL2, "target": GL2,
                                        "hom": "identity", "signal": "0.5:1.0"})
    assert r.status_code == 200
    assert r.json()["pass"] is True


def test_conjugate_detects_wrong_target(client):
    tgt = system_to_text(determinant_target_system(gl2_linear(traceful=True)))
    bumped = tgt.replace("field Y1 = invariant [2.0]", "field Y1 = invariant [2.1]")
    assert bumped != tgt
    r = client.post("/conjugate", json={"system": GL2_TRACEFUL, "target": bumped,
                                        "hom": "det", "signal": "1.0:1.0"})
    assert r.status_code == 200
    body = r.json()
    assert body["pass"] is False
    assert body["worst_error"] >= 0.01


def test_larc(client):
    r = client.post("/larc", json={"system": system_to_text(heis3_invariant())})
    assert r.status_code == 200
    assert r.json() == {"rank": 3, "dim": 3, "full": True}
    r2 = client.post("/larc", json={"system": system_to_text(so3_invariant())})
    assert r2.json()["rank"] == r2.json()["dim"] == 3


def test_larc_non_inner_is_hypothesis_error(client):
    r = client.post("/larc", json={"system": system_to_text(r2_bilinear())})
    assert r.status_code == 409
