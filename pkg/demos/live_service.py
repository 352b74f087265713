"""
Driving the classification service
==================================

Builds the HTTP app in-process, then walks the endpoints a UI would
use: health, model info, batch classification, and the streaming
socket a canvas frontend draws into.
"""

import json
import math

import numpy as np
from fastapi.testclient import TestClient

from knitpad import nn
from knitpad.mesh import MeshConfig
from knitpad.pipeline import FilterSpec
from knitpad.service import build_app

# An untrained model is fine for a protocol walkthrough.
spec = nn.ModelSpec(variant="cnn_lstm", seq_len=64)
params = nn.build_params(spec, seed=0)
mesh = MeshConfig()
app = build_app(params=params, mesh_config=mesh,
                filter_spec=FilterSpec(kept_levels=2, decomposition_depth=3))
client = TestClient(app)

print("GET /health ->", client.get("/health").json())
info = client.get("/model/info").json()
print("model:", info["variant"], "expects", info["seq_len"], "frames")

# Classify a trajectory: the service simulates the mesh response.
circle = [
    {"t": k / 32, "u": 0.5 + 0.3 * math.cos(2 * math.pi * k / 32),
     "v": 0.5 + 0.3 * math.sin(2 * math.pi * k / 32), "down": True}
    for k in range(33)
]
resp = client.post("/classify", json={"trajectory": circle})
body = resp.json()
print("trajectory ->", body["predicted"],
      f"(total latency {1000 * body['latency']['total']:.1f} ms)")

# The streaming socket echoes a gain frame per pointer event and sends
# one classification when the finger lifts.
with client.websocket_connect("/stream") as ws:
    for k, p in enumerate(circle):
        ws.send_text(json.dumps({
            "type": "pointer", "t": 1000.0 * p["t"],
            "u": p["u"], "v": p["v"],
            "down": k < len(circle) - 1,
        }))
        frame = json.loads(ws.receive_text())
        if k == 0:
            print("first stream frame:", np.round(frame["gains"], 4).tolist())
    verdict = json.loads(ws.receive_text())
    print("stream classification:", verdict["predicted"])
