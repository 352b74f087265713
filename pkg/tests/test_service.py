"""Service endpoint tests: REST classify, parity, and the stream protocol."""

import json
import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from knitpad import nn
from knitpad.io import write_sample_csv
from knitpad.mesh import MeshConfig
from knitpad.pipeline import FilterSpec, GainSeries
from knitpad.service import (
    ClassifyError,
    GestureClassifier,
    PointerSample,
    StreamSession,
    build_app,
    classify_request,
    no_touch_gains,
    trajectory_gain_series,
)

TINY_MESH = MeshConfig(rows=4, cols=4)
TINY_FILTER = FilterSpec(kept_levels=1, decomposition_depth=1)
SEQ_LEN = 16


@pytest.fixture(scope="module")
def params():
    spec = nn.ModelSpec(variant="cnn_lstm", in_channels=4, seq_len=SEQ_LEN,
                        n_classes=12, conv1_out=4, conv1_kernel=3,
                        conv2_out=6, conv2_kernel=3, lstm_layers=1,
                        lstm_hidden=8, dropout_p=0.0)
    return nn.build_params(spec, seed=21)


@pytest.fixture(scope="module")
def classifier(params):
    return GestureClassifier(params, TINY_MESH, TINY_FILTER)


@pytest.fixture(scope="module")
def client(params):
    app = build_app(params=params, mesh_config=TINY_MESH,
                    filter_spec=TINY_FILTER)
    return TestClient(app)


def sample_gains(seed=0):
    rng = np.random.default_rng(seed)
    base = np.array(no_touch_gains(TINY_MESH))
    frames = np.tile(base, (SEQ_LEN, 1)) * (1 + 0.05 * rng.standard_normal((SEQ_LEN, 4)))
    return np.abs(frames)


def circle_events(n=40, radius=0.3):
    events = []
    for k in range(n):
        theta = 2 * math.pi * k / (n - 1)
        events.append({"t": k / (n - 1),
                       "u": 0.5 + radius * math.cos(theta),
                       "v": 0.5 + radius * math.sin(theta)})
    return events


def test_health(client, params):
    resp = client.get("/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert body["model_version"] == params.version
    assert body["variant"] == "cnn_lstm"


def test_model_info(client):
    body = client.get("/model/info").json()
    assert body["seq_len"] == SEQ_LEN
    assert len(body["classes"]) == 12
    assert body["n_parameters"] > 0
    assert body["mesh"]["rows"] == 4
    assert body["mesh"]["worn_cap_offset"] == 0.0
    assert body["filter"]["wavelet"] == "sym4"


def test_classify_gains_payload(client):
    gains = sample_gains()
    resp = client.post("/classify", json={"gains": gains.tolist()})
    assert resp.status_code == 200
    body = resp.json()
    assert len(body["log_probs"]) == 12
    assert body["predicted_index"] == int(np.argmax(body["log_probs"]))
    latency = body["latency"]
    assert latency["preprocess"] >= 0 and latency["inference"] >= 0
    assert latency["preprocess"] + latency["inference"] <= latency["total"] + 1e-6


def test_online_matches_offline_bitwise(client, classifier):
    gains = sample_gains(seed=5)
    offline = classifier.classify_series(GainSeries(frames=gains))
    resp = client.post("/classify", json={"gains": gains.tolist()}).json()
    assert resp["predicted"] == offline.predicted.label
    assert resp["log_probs"] == [float(x) for x in offline.log_probs]


def test_classify_csv_body(client, classifier, tmp_path):
    gains = sample_gains(seed=6)
    path = tmp_path / "sample.csv"
    write_sample_csv(GainSeries(frames=gains), path)
    resp = client.post("/classify", content=path.read_bytes(),
                       headers={"content-type": "text/csv"})
    assert resp.status_code == 200
    offline = classifier.classify_series(GainSeries(frames=gains))
    assert resp.json()["log_probs"] == [float(x) for x in offline.log_probs]


def test_classify_trajectory_payload(client):
    resp = client.post("/classify", json={"trajectory": circle_events()})
    assert resp.status_code == 200
    body = resp.json()
    assert len(body["log_probs"]) == 12
    assert "latency" in body
    assert isinstance(body["predicted"], str)


def test_classify_rejects_malformed(client):
    gains = sample_gains().tolist()
    cases = [
        {},  # no payload
        {"gains": gains, "trajectory": circle_events()},  # both
        {"trajectory": circle_events(), "baseline": gains},
        {"gains": [[0.1, 0.2]]},  # wrong width
        {"gains": gains, "extra": 1},
        {"trajectory": [{"u": 0.5, "v": 0.5}]},  # missing t
        {"trajectory": [{"t": 0, "u": 0.5, "v": 0.5, "down": False}]},  # no touch
    ]
    for body in cases:
        resp = client.post("/classify", json=body)
        assert resp.status_code == 400, body
        assert "detail" in resp.json()
    resp = client.post("/classify", content=b"not json at all",
                       headers={"content-type": "application/json"})
    assert resp.status_code == 400
    resp = client.post("/classify", content=b"bad,csv,header",
                       headers={"content-type": "text/csv"})
    assert resp.status_code == 400


def test_classify_wrong_frame_count(client):
    gains = sample_gains()[:-4]
    resp = client.post("/classify", json={"gains": gains.tolist()})
    assert resp.status_code == 400
    assert "frames" in resp.json()["detail"]


def test_classify_oversized_payload(client, monkeypatch):
    import knitpad.service as service_mod
    monkeypatch.setattr(service_mod, "MAX_BODY_BYTES", 64)
    resp = client.post("/classify", json={"gains": sample_gains().tolist()})
    assert resp.status_code == 413


def test_stream_gesture_round_trip(client):
    with client.websocket_connect("/stream") as ws:
        events = circle_events(n=12)
        for k, e in enumerate(events):
            ws.send_text(json.dumps({"type": "pointer", "t": 1000.0 * e["t"],
                                     "u": e["u"], "v": e["v"], "down": True}))
            frame = json.loads(ws.receive_text())
            assert frame["type"] == "frame"
            assert len(frame["gains"]) == 4
        ws.send_text(json.dumps({"type": "pointer", "t": 1100.0,
                                 "u": 0.8, "v": 0.5, "down": False}))
        frame = json.loads(ws.receive_text())
        assert frame["type"] == "frame"
        result = json.loads(ws.receive_text())
        assert result["type"] == "classification"
        assert result["predicted_index"] == int(np.argmax(result["log_probs"]))
        # a second touch-up must not produce another classification
        ws.send_text(json.dumps({"type": "pointer", "t": 1200.0,
                                 "u": 0.8, "v": 0.5, "down": False}))
        only_frame = json.loads(ws.receive_text())
        assert only_frame["type"] == "frame"
        ws.send_text(json.dumps({"type": "config", "worn": True}))
        ack = json.loads(ws.receive_text())
        assert ack["type"] == "config" and ack["worn"] is True
        assert ack["model"]["mesh"]["worn_cap_offset"] > 0


def test_stream_session_errors(classifier):
    session = StreamSession(classifier)
    assert session.handle("not json")[0]["type"] == "error"
    assert session.handle(json.dumps({"type": "bogus"}))[0]["type"] == "error"
    assert session.handle(json.dumps(["list"]))[0]["type"] == "error"
    # monotonic timestamps enforced
    ok = session.handle(json.dumps({"type": "pointer", "t": 100.0,
                                    "u": 0.5, "v": 0.5, "down": True}))
    assert ok[0]["type"] == "frame"
    bad = session.handle(json.dumps({"type": "pointer", "t": 50.0,
                                     "u": 0.5, "v": 0.5, "down": True}))
    assert bad[0]["type"] == "error"
    bad_cfg = session.handle(json.dumps({"type": "config", "worn": "yes"}))
    assert bad_cfg[0]["type"] == "error"


def test_stream_session_worn_isolated_from_classifier(classifier):
    session = StreamSession(classifier)
    session.handle(json.dumps({"type": "config", "worn": True}))
    assert session.config.worn_cap_offset > 0
    assert classifier.mesh_config.worn_cap_offset == 0.0


def test_trajectory_synthesis_shapes_and_touch_band(classifier):
    events = [PointerSample(t=k / 30, u=0.2 + 0.6 * k / 30, v=0.5)
              for k in range(31)]
    series = trajectory_gain_series(TINY_MESH, events, n_frames=SEQ_LEN)
    assert series.frames.shape == (SEQ_LEN, 4)
    base = np.array(no_touch_gains(TINY_MESH))
    # leading and trailing margins sit at the no-touch baseline
    assert np.allclose(series.frames[0], base, atol=1e-9)
    assert np.allclose(series.frames[-1], base, atol=1e-9)
    # mid-gesture frames are attenuated
    mid = series.frames[SEQ_LEN // 2]
    assert (mid < base - 1e-6).any()


def test_trajectory_synthesis_validation():
    with pytest.raises(ClassifyError):
        trajectory_gain_series(TINY_MESH, [], n_frames=SEQ_LEN)
    backwards = [PointerSample(t=1.0, u=0.5, v=0.5),
                 PointerSample(t=0.5, u=0.5, v=0.5)]
    with pytest.raises(ClassifyError):
        trajectory_gain_series(TINY_MESH, backwards, n_frames=SEQ_LEN)
    hover = [PointerSample(t=0.0, u=0.5, v=0.5, down=False)]
    with pytest.raises(ClassifyError):
        trajectory_gain_series(TINY_MESH, hover, n_frames=SEQ_LEN)


def test_pointer_sample_clamps_coordinates():
    p = PointerSample(t=0.0, u=-0.5, v=1.7)
    assert p.u == 0.0 and p.v == 1.0
    with pytest.raises(ClassifyError):
        PointerSample(t=float("nan"), u=0.5, v=0.5)


def test_classify_request_single_event_tap(classifier):
    # a tap still synthesizes a full capture
    result = classify_request(classifier, {
        "trajectory": [{"t": 0.0, "u": 0.5, "v": 0.5}]})
    assert len(result.log_probs) == 12
