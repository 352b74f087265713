"""Classification service.

The GestureClassifier is the single code path behind both the CLI and
the network service, so offline and online answers for the same input
and model are bit-identical. The FastAPI app adds REST endpoints plus
the /stream websocket that segments live pointer events into gestures.
"""

import dataclasses
import io as stdio
import json
import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from . import nn
from .gestures import CLASS_LABELS, GestureClass
from .io import read_sample_stream
from .mesh import (
    MeshConfig,
    TouchPoint,
    simulate_trajectory,
    solve_corner_gains,
    trajectory_solver,
)
from .pipeline import FilterSpec, GainSeries, preprocess

DEFAULT_TOUCH_CAP = 60e-12
WORN_CAP_OFFSET = 25e-12

# capture layout used when synthesizing gains from a raw trajectory:
# the gesture occupies the middle 60% of the window, like the recording
# protocol's onset/offset margins
LEAD_FRACTION = 0.15
SPAN_FRACTION = 0.60
RAMP_FRACTION = 0.04

MAX_BODY_BYTES = 2_000_000
MAX_TRAJECTORY_EVENTS = 20_000


class ClassifyError(RuntimeError):
    """Bad classification input (wrong shape, malformed trajectory)."""


@dataclass(frozen=True)
class PointerSample:
    """One timestamped pointer state; t in seconds, u/v clamped to [0,1]."""

    t: float
    u: float
    v: float
    down: bool = True
    c_t: Optional[float] = None

    def __post_init__(self):
        for name in ("t", "u", "v"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ClassifyError(f"pointer field {name} must be a finite number")
        object.__setattr__(self, "u", min(max(float(self.u), 0.0), 1.0))
        object.__setattr__(self, "v", min(max(float(self.v), 0.0), 1.0))
        if self.c_t is not None and not (0.0 <= self.c_t <= 1e-6):
            raise ClassifyError("c_t out of range")

    def capacitance(self) -> float:
        return DEFAULT_TOUCH_CAP if self.c_t is None else float(self.c_t)


@dataclass(frozen=True)
class ClassifyResult:
    predicted: GestureClass
    log_probs: np.ndarray
    preprocess_seconds: float
    inference_seconds: float
    total_seconds: float

    def __post_init__(self):
        lp = np.asarray(self.log_probs, dtype=float)
        if lp.shape != (len(CLASS_LABELS),):
            raise ValueError(f"log_probs must have {len(CLASS_LABELS)} entries")
        object.__setattr__(self, "log_probs", lp)
        if self.predicted.index != int(lp.argmax()):
            raise ValueError("predicted class must be the argmax of log_probs")
        if min(self.preprocess_seconds, self.inference_seconds,
               self.total_seconds) < 0:
            raise ValueError("latency components must be non-negative")
        if self.preprocess_seconds + self.inference_seconds > self.total_seconds + 1e-6:
            raise ValueError("latency components exceed the total")

    def to_json(self) -> dict:
        return {
            "predicted": self.predicted.label,
            "predicted_index": self.predicted.index,
            "log_probs": [float(x) for x in self.log_probs],
            "latency": {
                "preprocess": self.preprocess_seconds,
                "inference": self.inference_seconds,
                "total": self.total_seconds,
            },
        }


@lru_cache(maxsize=8)
def no_touch_gains(config: MeshConfig) -> tuple:
    return solve_corner_gains(config, TouchPoint.absent()).gains


def _edge(x: float) -> float:
    x = min(max(x, 0.0), 1.0)
    return 0.5 - 0.5 * math.cos(math.pi * x)


def trajectory_gain_series(config: MeshConfig, events, n_frames: int = 250) -> GainSeries:
    """Synthesize an n_frames x 4 capture from raw pointer events.

    The event span is placed in the middle of the capture window with
    no-touch margins on both sides, and the touch capacitance gets a
    short raised-cosine on/off ramp.
    """
    events = list(events)
    if not events:
        raise ClassifyError("trajectory is empty")
    if len(events) > MAX_TRAJECTORY_EVENTS:
        raise ClassifyError("trajectory has too many events")
    times = [e.t for e in events]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ClassifyError("trajectory timestamps must be non-decreasing")
    # collapse duplicate timestamps, keeping the latest state
    deduped = {}
    for e in events:
        deduped[e.t] = e
    events = [deduped[t] for t in sorted(deduped)]

    down_times = [e.t for e in events if e.down]
    if not down_times:
        raise ClassifyError("trajectory has no touch-down events")

    t0 = events[0].t
    span = events[-1].t - t0
    duration = span / SPAN_FRACTION if span > 0 else 1.0
    lead = LEAD_FRACTION * duration
    ramp = RAMP_FRACTION * duration
    ramp = min(ramp, (down_times[-1] - down_times[0]) / 4.0)

    points = [(0.0, TouchPoint.absent())]
    for e in events:
        if e.down:
            factor = 1.0
            if ramp > 0:
                factor = _edge((e.t - down_times[0]) / ramp) * _edge(
                    (down_times[-1] - e.t) / ramp)
            touch = TouchPoint(u=e.u, v=e.v, c_t=e.capacitance() * factor,
                               present=True)
        else:
            touch = TouchPoint.absent()
        points.append((lead + (e.t - t0), touch))
    points.append((duration, TouchPoint.absent()))
    return simulate_trajectory(config, points, frame_rate=n_frames / duration,
                               duration=duration)


class _Sample:
    def __init__(self, series, baseline):
        self.series = series
        self.baseline = baseline


class GestureClassifier:
    """Loads once, classifies many times; deterministic eval path."""

    def __init__(self, params: nn.ModelParams, mesh_config: MeshConfig = MeshConfig(),
                 filter_spec: FilterSpec = FilterSpec()):
        self.params = params
        self.mesh_config = mesh_config
        self.filter_spec = filter_spec

    def baseline_series(self, config: MeshConfig = None) -> GainSeries:
        config = config or self.mesh_config
        return GainSeries(frames=np.array([no_touch_gains(config)]),
                          frame_rate=250.0)

    def classify_series(self, series: GainSeries, baseline: GainSeries = None,
                        config: MeshConfig = None,
                        _t_start: float = None) -> ClassifyResult:
        t_start = time.perf_counter() if _t_start is None else _t_start
        spec = self.params.spec
        if series.n_frames != spec.seq_len:
            raise ClassifyError(
                f"model expects {spec.seq_len} frames, got {series.n_frames}")
        if baseline is None:
            baseline = self.baseline_series(config)
        x = preprocess(_Sample(series, baseline), self.filter_spec)
        x = x[None].astype(np.float32)
        t_pre = time.perf_counter()
        log_probs = nn.forward(self.params, x, mode="eval")[0]
        t_end = time.perf_counter()
        predicted = GestureClass(CLASS_LABELS[int(np.argmax(log_probs))])
        return ClassifyResult(
            predicted=predicted,
            log_probs=np.asarray(log_probs, dtype=float),
            preprocess_seconds=t_pre - t_start,
            inference_seconds=t_end - t_pre,
            total_seconds=t_end - t_start,
        )

    def classify_trajectory(self, events, config: MeshConfig = None):
        """Returns (ClassifyResult, synthesized GainSeries)."""
        t_start = time.perf_counter()
        config = config or self.mesh_config
        series = trajectory_gain_series(config, events,
                                        n_frames=self.params.spec.seq_len)
        result = self.classify_series(series, config=config, _t_start=t_start)
        return result, series

    def model_info(self) -> dict:
        spec = self.params.spec
        mesh = self.mesh_config
        n_parameters = int(sum(t.size for t in self.params.tensors.values()))
        return {
            "variant": spec.variant,
            "seq_len": spec.seq_len,
            "in_channels": spec.in_channels,
            "n_classes": spec.n_classes,
            "classes": list(CLASS_LABELS),
            "n_parameters": n_parameters,
            "model_version": self.params.version,
            "mesh": {
                "rows": mesh.rows,
                "cols": mesh.cols,
                "sheet_resistance": mesh.sheet_resistance,
                "drive_frequency": mesh.drive_frequency,
                "worn_cap_offset": mesh.worn_cap_offset,
            },
            "filter": {
                "wavelet": self.filter_spec.wavelet,
                "kept_levels": self.filter_spec.kept_levels,
                "decomposition_depth": self.filter_spec.decomposition_depth,
            },
        }


# -------------------------------------------------------------- request parsing


def _parse_pointer_event(obj, index) -> PointerSample:
    if not isinstance(obj, dict):
        raise ClassifyError(f"trajectory[{index}] must be an object")
    unknown = set(obj) - {"t", "u", "v", "down", "c_t"}
    if unknown:
        raise ClassifyError(f"trajectory[{index}] has unknown fields {sorted(unknown)}")
    missing = {"t", "u", "v"} - set(obj)
    if missing:
        raise ClassifyError(f"trajectory[{index}] is missing {sorted(missing)}")
    down = obj.get("down", True)
    if not isinstance(down, bool):
        raise ClassifyError(f"trajectory[{index}].down must be a boolean")
    return PointerSample(t=obj["t"], u=obj["u"], v=obj["v"], down=down,
                         c_t=obj.get("c_t"))


def parse_trajectory(items) -> list:
    if not isinstance(items, list) or not items:
        raise ClassifyError("trajectory must be a non-empty list of events")
    return [_parse_pointer_event(obj, i) for i, obj in enumerate(items)]


def _gain_series_from_rows(rows, what) -> GainSeries:
    try:
        frames = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ClassifyError(f"{what} must be a numeric matrix") from exc
    if frames.ndim != 2 or frames.shape[1] != 4:
        raise ClassifyError(f"{what} must have 4 columns")
    try:
        return GainSeries(frames=frames)
    except ValueError as exc:
        raise ClassifyError(f"invalid {what}: {exc}") from exc


def classify_request(classifier: GestureClassifier, body: dict) -> ClassifyResult:
    """Dispatch a decoded ClassifyRequest body; exactly one payload variant."""
    if not isinstance(body, dict):
        raise ClassifyError("request body must be an object")
    unknown = set(body) - {"gains", "baseline", "trajectory"}
    if unknown:
        raise ClassifyError(f"unknown fields {sorted(unknown)}")
    has_gains = body.get("gains") is not None
    has_traj = body.get("trajectory") is not None
    if has_gains == has_traj:
        raise ClassifyError("provide exactly one of 'gains' or 'trajectory'")
    if has_traj:
        if body.get("baseline") is not None:
            raise ClassifyError("'baseline' only applies to 'gains' payloads")
        events = parse_trajectory(body["trajectory"])
        result, _ = classifier.classify_trajectory(events)
        return result
    series = _gain_series_from_rows(body["gains"], "gains")
    baseline = None
    if body.get("baseline") is not None:
        baseline = _gain_series_from_rows(body["baseline"], "baseline")
    return classifier.classify_series(series, baseline=baseline)


# -------------------------------------------------------------------- streaming


class StreamSession:
    """State for one /stream connection: private frame buffer, worn toggle."""

    def __init__(self, classifier: GestureClassifier):
        self.classifier = classifier
        self.base_config = classifier.mesh_config
        self.config = classifier.mesh_config
        self.touch_cap = DEFAULT_TOUCH_CAP
        self.worn = False
        self.buffer = []
        self.last_t = -math.inf

    def handle(self, text: str) -> list:
        try:
            msg = json.loads(text)
        except json.JSONDecodeError:
            return [{"type": "error", "detail": "message is not valid JSON"}]
        try:
            if not isinstance(msg, dict):
                raise ClassifyError("message must be an object")
            kind = msg.get("type")
            if kind == "pointer":
                return self._pointer(msg)
            if kind == "config":
                return self._config(msg)
            raise ClassifyError(f"unknown message type {kind!r}")
        except (ClassifyError, ValueError) as exc:
            return [{"type": "error", "detail": str(exc)}]

    def _config(self, msg) -> list:
        worn = msg.get("worn", self.worn)
        if not isinstance(worn, bool):
            raise ClassifyError("config.worn must be a boolean")
        if "c_t" in msg and msg["c_t"] is not None:
            c_t = msg["c_t"]
            if not (isinstance(c_t, (int, float)) and 0 < c_t <= 1e-6):
                raise ClassifyError("config.c_t out of range")
            self.touch_cap = float(c_t)
        self.worn = worn
        offset = WORN_CAP_OFFSET if worn else 0.0
        self.config = dataclasses.replace(self.base_config,
                                          worn_cap_offset=offset)
        info = dict(self.classifier.model_info())
        info["mesh"] = dict(info["mesh"], worn_cap_offset=self.config.worn_cap_offset)
        return [{"type": "config", "worn": self.worn, "c_t": self.touch_cap,
                 "model": info}]

    def _pointer(self, msg) -> list:
        event = _parse_pointer_event(
            {k: v for k, v in msg.items() if k != "type"}, 0)
        if event.t < self.last_t:
            raise ClassifyError("pointer timestamps must be monotonic")
        self.last_t = event.t
        t_s = event.t / 1000.0  # stream timestamps are milliseconds
        if event.down:
            touch = TouchPoint(u=event.u, v=event.v, c_t=self.touch_cap,
                               present=True)
        else:
            touch = TouchPoint.absent()
        frame = trajectory_solver(self.config).gains(touch)
        replies = [{"type": "frame", "t": event.t,
                    "gains": [float(g) for g in frame.gains]}]
        if event.down:
            self.buffer.append(PointerSample(t=t_s, u=event.u, v=event.v,
                                             down=True, c_t=self.touch_cap))
        elif self.buffer:
            # touch-up closes the gesture: exactly one classification
            result, _ = self.classifier.classify_trajectory(
                self.buffer, config=self.config)
            self.buffer = []
            reply = dict(result.to_json(), type="classification", worn=self.worn)
            replies.append(reply)
        return replies


# ------------------------------------------------------------------------- app


def build_app(params: nn.ModelParams = None, model_path=None,
              mesh_config: MeshConfig = MeshConfig(),
              filter_spec: FilterSpec = FilterSpec()) -> FastAPI:
    if params is None:
        if model_path is None:
            raise ValueError("need params or model_path")
        params = nn.load_model(model_path)
    classifier = GestureClassifier(params, mesh_config, filter_spec)
    app = FastAPI(title="knitpad", docs_url=None, redoc_url=None)
    app.state.classifier = classifier

    @app.get("/health")
    def health():
        return {"status": "ok", "model_version": classifier.params.version,
                "variant": classifier.params.spec.variant}

    @app.get("/model/info")
    def model_info():
        return classifier.model_info()

    @app.post("/classify")
    async def classify(request: Request):
        length = request.headers.get("content-length")
        if length and int(length) > MAX_BODY_BYTES:
            return JSONResponse({"detail": "payload too large"}, status_code=413)
        body = await request.body()
        if len(body) > MAX_BODY_BYTES:
            return JSONResponse({"detail": "payload too large"}, status_code=413)
        content_type = request.headers.get("content-type", "")
        try:
            if content_type.startswith("text/csv"):
                series = read_sample_stream(
                    stdio.StringIO(body.decode("utf-8")), origin="request body")
                result = classifier.classify_series(series)
            else:
                try:
                    decoded = json.loads(body)
                except json.JSONDecodeError:
                    raise ClassifyError("request body is not valid JSON")
                result = classify_request(classifier, decoded)
        except (ClassifyError, ValueError) as exc:
            return JSONResponse({"detail": str(exc)}, status_code=400)
        return result.to_json()

    @app.websocket("/stream")
    async def stream(ws: WebSocket):
        await ws.accept()
        session = StreamSession(classifier)
        try:
            while True:
                text = await ws.receive_text()
                for reply in session.handle(text):
                    await ws.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass

    return app
