/**
 * Wire types for the touchpad service.
 *
 * The server speaks JSON text frames over the /stream websocket and the
 * /classify endpoint. Everything arriving from the network is treated as
 * untrusted: parseServerMessage returns null for anything malformed so
 * the caller can drop it and keep the session alive.
 */

export interface FrameMessage {
  type: "frame";
  /** milliseconds since session start, echoing the pointer event */
  t: number;
  gains: [number, number, number, number];
}

export interface LatencySplit {
  preprocess: number;
  inference: number;
  total: number;
}

export interface ClassificationMessage {
  type: "classification";
  predicted: string;
  predicted_index: number;
  log_probs: number[];
  latency: LatencySplit;
  worn: boolean;
}

export interface ModelEcho {
  classes: string[];
  mesh: { worn_cap_offset: number; [key: string]: unknown };
  [key: string]: unknown;
}

export interface ConfigMessage {
  type: "config";
  worn: boolean;
  c_t: number;
  model: ModelEcho;
}

export interface ErrorMessage {
  type: "error";
  detail: string;
}

export type ServerMessage =
  | FrameMessage
  | ClassificationMessage
  | ConfigMessage
  | ErrorMessage;

const isFiniteNumber = (x: unknown): x is number =>
  typeof x === "number" && Number.isFinite(x);

const isNumberArray = (x: unknown, length?: number): x is number[] =>
  Array.isArray(x) &&
  (length === undefined || x.length === length) &&
  x.every(isFiniteNumber);

function asRecord(x: unknown): Record<string, unknown> | null {
  return typeof x === "object" && x !== null && !Array.isArray(x)
    ? (x as Record<string, unknown>)
    : null;
}

function parseFrame(m: Record<string, unknown>): FrameMessage | null {
  if (!isFiniteNumber(m.t) || !isNumberArray(m.gains, 4)) return null;
  return { type: "frame", t: m.t, gains: m.gains as FrameMessage["gains"] };
}

function parseClassification(
  m: Record<string, unknown>,
): ClassificationMessage | null {
  const latency = asRecord(m.latency);
  if (
    typeof m.predicted !== "string" ||
    !isFiniteNumber(m.predicted_index) ||
    !isNumberArray(m.log_probs) ||
    m.log_probs.length === 0 ||
    latency === null ||
    !isFiniteNumber(latency.preprocess) ||
    !isFiniteNumber(latency.inference) ||
    !isFiniteNumber(latency.total) ||
    typeof m.worn !== "boolean"
  ) {
    return null;
  }
  const index = m.predicted_index;
  if (!Number.isInteger(index) || index < 0 || index >= m.log_probs.length) {
    return null;
  }
  return {
    type: "classification",
    predicted: m.predicted,
    predicted_index: index,
    log_probs: m.log_probs,
    latency: {
      preprocess: latency.preprocess,
      inference: latency.inference,
      total: latency.total,
    },
    worn: m.worn,
  };
}

function parseConfig(m: Record<string, unknown>): ConfigMessage | null {
  const model = asRecord(m.model);
  if (typeof m.worn !== "boolean" || !isFiniteNumber(m.c_t) || model === null) {
    return null;
  }
  const mesh = asRecord(model.mesh);
  const classes = model.classes;
  if (
    mesh === null ||
    !isFiniteNumber(mesh.worn_cap_offset) ||
    !Array.isArray(classes) ||
    !classes.every((c) => typeof c === "string")
  ) {
    return null;
  }
  return {
    type: "config",
    worn: m.worn,
    c_t: m.c_t,
    model: { ...model, classes, mesh: { ...mesh, worn_cap_offset: mesh.worn_cap_offset } },
  };
}

export function parseServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  const m = asRecord(raw);
  if (m === null) return null;
  switch (m.type) {
    case "frame":
      return parseFrame(m);
    case "classification":
      return parseClassification(m);
    case "config":
      return parseConfig(m);
    case "error":
      return typeof m.detail === "string"
        ? { type: "error", detail: m.detail }
        : null;
    default:
      return null;
  }
}

// ------------------------------------------------------------- client side

export interface PointerEventOut {
  t: number;
  u: number;
  v: number;
  down: boolean;
}

export function pointerMessage(event: PointerEventOut): string {
  return JSON.stringify({
    type: "pointer",
    t: event.t,
    u: event.u,
    v: event.v,
    down: event.down,
  });
}

/** Session config update; omit a field to leave it unchanged server-side. */
export function configMessage(worn?: boolean, cT?: number): string {
  const msg: Record<string, unknown> = { type: "config" };
  if (worn !== undefined) msg.worn = worn;
  if (cT !== undefined) msg.c_t = cT;
  return JSON.stringify(msg);
}
