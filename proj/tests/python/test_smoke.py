import json
import math
import os
import socket
import subprocess
import time
import urllib.error
import urllib.request

import pytest

import fixtime


def test_categorize_boundaries():
    assert fixtime.categorize(0.0) == "LessThanHalfDay"
    assert fixtime.categorize(0.5) == "HalfToTwoDays"
    assert fixtime.categorize(2.0) == "TwoToFiveDays"
    assert fixtime.categorize(4.99) == "TwoToFiveDays"
    assert fixtime.categorize(5.0) == "MoreThanFiveDays"
    with pytest.raises(ValueError):
        fixtime.categorize(-1.0)


def test_clean_text():
    assert fixtime.clean_text("<p>The 404 error</p>") == ["error"]
    assert fixtime.clean_text("") == []


def test_metrics_worked_example():
    m = fixtime.metrics([0, 0, 1, 1], [0, 1, 1, 1])
    assert m["accuracy"] == 0.75
    assert math.isclose(m["f1_macro"], 11 / 15, abs_tol=1e-12)


def test_stratified_split():
    labels = [0] * 50 + [1] * 30 + [2] * 20
    train, test = fixtime.stratified_split(labels, 3, 0.8, seed=1)
    assert sorted(train + test) == list(range(100))
    assert [sum(labels[i] == c for i in train) for c in range(3)] == [40, 24, 16]
    assert fixtime.stratified_split(labels, 3, 0.8, seed=1) == (train, test)
    with pytest.raises(fixtime.StratificationError):
        fixtime.stratified_split([0, 0, 1], 2)


def test_default_config_round_trips_through_ingest(dump_path):
    cfg = fixtime.default_config()
    assert cfg["format"] == "fixtime.config"
    corpus, report = fixtime.ingest(dump_path, cfg)
    assert report["parsed"] == 300
    assert len(report["malformed"]) == 1
    assert report["kept"] == len(corpus["issues"]) == 300


def test_config_errors(dump_path):
    with pytest.raises(fixtime.ConfigError):
        fixtime.ingest(dump_path, {"version": 1, "nonsense": True})
    with pytest.raises(fixtime.FixtimeError):
        fixtime.ingest(dump_path, strict=True)
    with pytest.raises(fixtime.CorpusEmpty):
        fixtime.ingest(dump_path, project="OTHER")


def test_insights_totals(corpus):
    t = fixtime.insights(corpus)
    assert t["corpus_size"] == 300
    for key in ("by_priority", "by_issue_type", "by_component"):
        assert t[key]["total"] == 300


def test_predict_explain_whatif(bundle, new_issue):
    assert bundle.project == "PY"
    assert bundle.n_train == 300
    p = bundle.predict(new_issue)
    assert math.isclose(sum(p["final_probs"].values()), 1.0, abs_tol=1e-9)
    assert len(p["per_view"]) == 7
    assert p["predicted"] == max(p["final_probs"], key=p["final_probs"].get)
    e = bundle.explain(new_issue)
    assert {v["view"] for v in e["views"]} == set(p["per_view"])
    w = bundle.whatif(new_issue, {})
    assert all(d == 0.0 for d in w["delta"].values())
    w = bundle.whatif(new_issue, {"priority": "Minor"})
    assert w["modified"]["per_view"]["assignee"] == w["baseline"]["per_view"]["assignee"]
    with pytest.raises(fixtime.OverrideError):
        bundle.whatif(new_issue, {"created_at": "2020-01-01T00:00:00Z"})
    with pytest.raises(fixtime.ValidationError):
        bundle.predict({"priority": "Major"})


def test_bundle_save_load(bundle, new_issue, tmp_path):
    path = tmp_path / "PY.json"
    bundle.save(path)
    back = fixtime.Bundle.load(path)
    assert back.predict(new_issue) == bundle.predict(new_issue)
    assert fixtime.Bundle.from_json(bundle.to_json()).topics() == bundle.topics()


def test_service_routes(bundle, new_issue, tmp_path):
    svc = fixtime.Service(bundles={"PY": bundle})
    assert svc.projects() == ["PY"]
    status, body = svc.handle("GET", "/projects")
    assert status == 200 and body["projects"][0]["id"] == "PY"
    status, body = svc.handle("POST", "/projects/PY/predict", new_issue)
    assert status == 200
    assert abs(sum(body["final_probs"].values()) - 1.0) <= 2e-4
    assert svc.handle("POST", "/projects/NOPE/predict", new_issue)[0] == 404
    status, body = svc.handle("POST", "/projects/PY/predict", {"priority": "Major"})
    assert status == 422 and "summary" in body["fields"]
    status, body = svc.handle("GET", "/projects/PY/topics")
    assert status == 200 and body["k"] >= 2
    bundle.save(tmp_path / "PY.json")
    assert fixtime.Service(directory=tmp_path).projects() == ["PY"]


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _request(url, data=None, method=None):
    req = urllib.request.Request(url, data=data, method=method, headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=10) as r:
            return r.status, dict(r.headers), r.read()
    except urllib.error.HTTPError as e:
        return e.code, dict(e.headers), e.read()


@pytest.mark.skipif(not os.environ.get("FIXTIME_BIN"), reason="FIXTIME_BIN not set")
def test_http_server(bundle, new_issue, tmp_path):
    bundle.save(tmp_path / "PY.json")
    port = _free_port()
    proc = subprocess.Popen(
        [os.environ["FIXTIME_BIN"], "serve", "--bundles", str(tmp_path), "--addr", f"127.0.0.1:{port}"],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    base = f"http://127.0.0.1:{port}"
    try:
        for _ in range(100):
            try:
                status, headers, body = _request(base + "/projects")
                break
            except (urllib.error.URLError, ConnectionError):
                time.sleep(0.1)
        else:
            pytest.fail("server did not start")
        assert status == 200
        assert headers.get("Access-Control-Allow-Origin") == "*"
        assert json.loads(body)["projects"][0]["id"] == "PY"
        status, headers, body = _request(base + "/projects/PY/predict", json.dumps(new_issue).encode())
        assert status == 200
        assert headers["Content-Type"].startswith("application/json")
        assert json.loads(body)["predicted"] in {"LessThanHalfDay", "HalfToTwoDays", "TwoToFiveDays", "MoreThanFiveDays"}
        status, _, body = _request(base + "/projects/PY/whatif",
                                   json.dumps({"issue": new_issue, "overrides": {"created_at": "x"}}).encode())
        assert status == 422 and json.loads(body)["fields"] == ["overrides.created_at"]
        status, headers, _ = _request(base + "/projects/PY/predict", method="OPTIONS")
        assert status == 204
        assert "POST" in headers.get("Access-Control-Allow-Methods", "")
    finally:
        proc.terminate()
        proc.wait(timeout=10)
