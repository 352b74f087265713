import {
  parseServerMessage,
  type ClassificationMessage,
  type ModelEcho,
  type ServerMessage,
} from "./protocol.js";
import { probabilitiesFromLogProbs } from "./probs.js";
import { TraceBuffer } from "./traces.js";

export interface PredictionPanel {
  label: string;
  index: number;
  probabilities: number[];
  latency: { preprocess: number; inference: number; total: number };
  worn: boolean;
}

/**
 * Everything the page renders, network-independent. The DOM layer feeds
 * raw websocket text into applyServerText and paints whatever ends up
 * here; tests drive it the same way.
 */
export interface SessionView {
  traces: TraceBuffer;
  prediction: PredictionPanel | null;
  predictionUpdates: number;
  wornConfirmed: boolean;
  touchCap: number | null;
  model: ModelEcho | null;
  droppedMessages: number;
  lastError: string | null;
}

export function createView(): SessionView {
  return {
    traces: new TraceBuffer(),
    prediction: null,
    predictionUpdates: 0,
    wornConfirmed: false,
    touchCap: null,
    model: null,
    droppedMessages: 0,
    lastError: null,
  };
}

function panelFrom(msg: ClassificationMessage): PredictionPanel {
  return {
    label: msg.predicted,
    index: msg.predicted_index,
    probabilities: probabilitiesFromLogProbs(msg.log_probs),
    latency: msg.latency,
    worn: msg.worn,
  };
}

export type ApplyOutcome = ServerMessage["type"] | "dropped";

/**
 * Fold one raw server message into the view. Malformed input counts as
 * dropped and changes nothing else; the session keeps going.
 */
export function applyServerText(view: SessionView, text: string): ApplyOutcome {
  const msg = parseServerMessage(text);
  if (msg === null) {
    view.droppedMessages += 1;
    return "dropped";
  }
  switch (msg.type) {
    case "frame":
      view.traces.append(msg);
      break;
    case "classification":
      view.prediction = panelFrom(msg);
      view.predictionUpdates += 1;
      break;
    case "config":
      view.wornConfirmed = msg.worn;
      view.touchCap = msg.c_t;
      view.model = msg.model;
      break;
    case "error":
      view.lastError = msg.detail;
      break;
  }
  return msg.type;
}

/**
 * The worn toggle is only trusted once the server's config echo agrees:
 * worn mode must come with a positive capacitance offset in the mesh it
 * reports, and benchtop mode with none.
 */
export function wornEchoConsistent(view: SessionView): boolean {
  if (view.model === null) return !view.wornConfirmed;
  const offset = view.model.mesh.worn_cap_offset;
  return view.wornConfirmed ? offset > 0 : offset === 0;
}
