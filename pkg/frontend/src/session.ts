import { configMessage, pointerMessage, type PointerEventOut } from "./protocol.js";

export interface OutboundSocket {
  send(text: string): void;
}

const clamp01 = (x: number) => Math.min(1, Math.max(0, x));

/**
 * One drawing session over an open stream socket.
 *
 * Owns the pointer state machine: a stroke is a down, any number of
 * moves, and exactly one up. Coordinates are clamped to the pad, so a
 * pointer wandering off the canvas mid-stroke keeps drawing at the
 * edge. Timestamps are milliseconds since the session started and never
 * run backwards, even if the wall clock does.
 */
export class DrawingSession {
  private origin: number | null = null;
  private lastT = 0;
  private down = false;
  private strokes = 0;

  constructor(
    private readonly socket: OutboundSocket,
    private readonly clock: () => number = () => Date.now(),
  ) {}

  get isDown(): boolean {
    return this.down;
  }

  get strokesCompleted(): number {
    return this.strokes;
  }

  private stamp(): number {
    const now = this.clock();
    if (this.origin === null) this.origin = now;
    const t = Math.max(now - this.origin, this.lastT);
    this.lastT = t;
    return t;
  }

  private emit(u: number, v: number, down: boolean): PointerEventOut {
    const event: PointerEventOut = {
      t: this.stamp(),
      u: clamp01(u),
      v: clamp01(v),
      down,
    };
    this.socket.send(pointerMessage(event));
    return event;
  }

  pointerDown(u: number, v: number): PointerEventOut | null {
    if (this.down) return null;
    this.down = true;
    return this.emit(u, v, true);
  }

  pointerMove(u: number, v: number): PointerEventOut | null {
    if (!this.down) return null; // hovering is not part of a gesture
    return this.emit(u, v, true);
  }

  pointerUp(u: number, v: number): PointerEventOut | null {
    if (!this.down) return null;
    this.down = false;
    this.strokes += 1;
    return this.emit(u, v, false);
  }

  /** Abandon an in-flight stroke without requesting a classification. */
  cancelStroke(): void {
    this.down = false;
  }

  setWorn(worn: boolean): void {
    this.socket.send(configMessage(worn));
  }

  setTouchCap(cT: number): void {
    if (!(cT > 0)) throw new Error("touch capacitance must be positive");
    this.socket.send(configMessage(undefined, cT));
  }
}
