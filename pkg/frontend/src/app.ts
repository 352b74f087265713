/**
 * DOM shell: wires the canvas, controls, and websocket to the pure
 * session/view logic. Everything testable lives in the other modules;
 * this file only translates browser events.
 */

import { GLYPH_STROKES } from "./glyphs.js";
import { DrawingSession } from "./session.js";
import { applyServerText, createView, wornEchoConsistent, type SessionView } from "./view.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el as T;
};

const urlInput = $<HTMLInputElement>("server-url");
const connectBtn = $<HTMLButtonElement>("connect");
const statusEl = $<HTMLSpanElement>("status");
const pad = $<HTMLCanvasElement>("pad");
const tracesCanvas = $<HTMLCanvasElement>("traces");
const barsEl = $<HTMLDivElement>("bars");
const predictedEl = $<HTMLDivElement>("predicted");
const latencyEl = $<HTMLDivElement>("latency");
const wornToggle = $<HTMLInputElement>("worn");
const wornState = $<HTMLSpanElement>("worn-state");
const capSlider = $<HTMLInputElement>("cap");
const capValue = $<HTMLSpanElement>("cap-value");
const chartEl = $<HTMLDivElement>("chart");

let view: SessionView = createView();
let session: DrawingSession | null = null;
let ws: WebSocket | null = null;
let stroke: Array<[number, number]> = [];

function setStatus(text: string, cls: string): void {
  statusEl.textContent = text;
  statusEl.className = cls;
}

function connect(): void {
  ws?.close();
  view = createView();
  stroke = [];
  const base = urlInput.value.replace(/\/+$/, "");
  setStatus("connecting...", "pending");

  fetch(`${base}/model/info`)
    .then((r) => r.json())
    .then((info) => {
      view.model = info;
      drawChart(info.classes ?? []);
    })
    .catch((err) => console.warn("model info fetch failed", err));

  const socket = new WebSocket(`${base.replace(/^http/, "ws")}/stream`);
  ws = socket;
  socket.onopen = () => {
    setStatus("connected", "ok");
    session = new DrawingSession({ send: (t) => socket.send(t) }, () =>
      performance.now(),
    );
    // bring the fresh server session in line with the controls
    session.setWorn(wornToggle.checked);
    session.setTouchCap(Number(capSlider.value) * 1e-12);
  };
  socket.onmessage = (ev) => {
    if (typeof ev.data !== "string") return;
    if (applyServerText(view, ev.data) === "dropped") {
      console.warn("dropped malformed server frame", ev.data);
    }
  };
  socket.onclose = () => {
    // buffered events die with the socket; the user reconnects explicitly
    session?.cancelStroke();
    session = null;
    setStatus("disconnected - press connect", "bad");
  };
  socket.onerror = () => setStatus("connection error", "bad");
}

connectBtn.onclick = connect;

// ------------------------------------------------------------ pad input

function padCoords(ev: PointerEvent): [number, number] {
  const rect = pad.getBoundingClientRect();
  return [
    (ev.clientX - rect.left) / rect.width,
    (ev.clientY - rect.top) / rect.height,
  ];
}

pad.addEventListener("pointerdown", (ev) => {
  const [u, v] = padCoords(ev);
  if (session?.pointerDown(u, v)) {
    pad.setPointerCapture(ev.pointerId);
    stroke = [[u, v]];
  }
});
pad.addEventListener("pointermove", (ev) => {
  const [u, v] = padCoords(ev);
  if (session?.pointerMove(u, v)) stroke.push([u, v]);
});
const finish = (ev: PointerEvent) => {
  const [u, v] = padCoords(ev);
  session?.pointerUp(u, v);
};
pad.addEventListener("pointerup", finish);
pad.addEventListener("pointercancel", finish);

wornToggle.onchange = () => session?.setWorn(wornToggle.checked);
capSlider.oninput = () => {
  capValue.textContent = `${capSlider.value} pF`;
  session?.setTouchCap(Number(capSlider.value) * 1e-12);
};

// ------------------------------------------------------------ rendering

const TRACE_COLORS = ["#e4572e", "#17bebb", "#ffc914", "#76b041"];
const TRACE_WINDOW = 400;

function drawPad(): void {
  const ctx = pad.getContext("2d")!;
  const { width: w, height: h } = pad;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#2a2a33";
  for (let i = 1; i < 8; i++) {
    ctx.beginPath();
    ctx.moveTo((i * w) / 8, 0);
    ctx.lineTo((i * w) / 8, h);
    ctx.moveTo(0, (i * h) / 8);
    ctx.lineTo(w, (i * h) / 8);
    ctx.stroke();
  }
  if (stroke.length > 1) {
    ctx.strokeStyle = "#f4f4f6";
    ctx.lineWidth = 3;
    ctx.lineJoin = "round";
    ctx.beginPath();
    ctx.moveTo(stroke[0]![0] * w, stroke[0]![1] * h);
    for (const [u, v] of stroke) ctx.lineTo(u * w, v * h);
    ctx.stroke();
    ctx.lineWidth = 1;
  }
}

function drawTraces(): void {
  const ctx = tracesCanvas.getContext("2d")!;
  const { width: w, height: h } = tracesCanvas;
  ctx.clearRect(0, 0, w, h);
  const frames = view.traces.frames();
  const shown = frames.slice(-TRACE_WINDOW);
  if (shown.length < 2) return;
  let lo = Infinity;
  let hi = -Infinity;
  for (const f of shown) {
    for (const g of f.gains) {
      lo = Math.min(lo, g);
      hi = Math.max(hi, g);
    }
  }
  const pad_ = (hi - lo) * 0.1 + 1e-6;
  lo -= pad_;
  hi += pad_;
  for (let ch = 0; ch < 4; ch++) {
    ctx.strokeStyle = TRACE_COLORS[ch]!;
    ctx.beginPath();
    shown.forEach((f, i) => {
      const x = (i / (TRACE_WINDOW - 1)) * w;
      const y = h - ((f.gains[ch]! - lo) / (hi - lo)) * h;
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
}

function renderPanel(): void {
  const p = view.prediction;
  predictedEl.textContent = p ? p.label : "—";
  const labels: string[] = view.model?.classes ?? [];
  if (p) {
    const rows = p.probabilities
      .map((prob, i) => {
        const label = labels[i] ?? String(i);
        const on = i === p.index ? " on" : "";
        const pct = (prob * 100).toFixed(1);
        return `<div class="bar-row"><span class="bar-label">${label}</span>` +
          `<div class="bar-track"><div class="bar-fill${on}" style="width:${(prob * 100).toFixed(2)}%"></div></div>` +
          `<span class="bar-pct">${pct}%</span></div>`;
      })
      .join("");
    barsEl.innerHTML = rows;
    const ms = (s: number) => (s * 1000).toFixed(1);
    latencyEl.textContent =
      `preprocess ${ms(p.latency.preprocess)} ms + ` +
      `inference ${ms(p.latency.inference)} ms = ${ms(p.latency.total)} ms`;
  }
  const consistent = wornEchoConsistent(view) ? "" : " (echo mismatch!)";
  wornState.textContent = view.wornConfirmed
    ? `worn mode confirmed${consistent}`
    : `benchtop${consistent}`;
}

function drawChart(labels: string[]): void {
  chartEl.innerHTML = "";
  for (const label of labels) {
    const cell = document.createElement("div");
    cell.className = "glyph-cell";
    const canvas = document.createElement("canvas");
    canvas.width = 64;
    canvas.height = 64;
    const ctx = canvas.getContext("2d")!;
    const strokes = GLYPH_STROKES[label];
    if (strokes) {
      ctx.strokeStyle = "#9ad1d4";
      ctx.lineWidth = 2.5;
      ctx.lineJoin = "round";
      ctx.lineCap = "round";
      for (const s of strokes) {
        ctx.beginPath();
        s.forEach(([u, v], i) => {
          if (i === 0) ctx.moveTo(u * 64, v * 64);
          else ctx.lineTo(u * 64, v * 64);
        });
        ctx.stroke();
      }
    } else {
      ctx.fillStyle = "#9ad1d4";
      ctx.font = "40px sans-serif";
      ctx.textAlign = "center";
      ctx.textBaseline = "middle";
      ctx.fillText(label, 32, 34);
    }
    const caption = document.createElement("span");
    caption.textContent = label;
    cell.append(canvas, caption);
    chartEl.append(cell);
  }
}

function frame(): void {
  drawPad();
  drawTraces();
  renderPanel();
  requestAnimationFrame(frame);
}

capValue.textContent = `${capSlider.value} pF`;
requestAnimationFrame(frame);
