import type { FrameMessage } from "./protocol.js";

/**
 * Ordered store for the live gain traces.
 *
 * Every frame the server sends is appended exactly once, in arrival
 * order; the renderer reads whatever is present at display cadence, so
 * a slow display can never drop a frame from the record. Memory stays
 * bounded by trimming the oldest frames once over capacity, far beyond
 * a single gesture's length.
 */
export class TraceBuffer {
  private store: FrameMessage[] = [];
  private total = 0;

  constructor(readonly capacity: number = 5000) {
    if (capacity < 1) throw new Error("capacity must be >= 1");
  }

  append(frame: FrameMessage): void {
    this.store.push(frame);
    this.total += 1;
    if (this.store.length > this.capacity) {
      this.store.splice(0, this.store.length - this.capacity);
    }
  }

  /** Frames currently held, oldest first. */
  frames(): readonly FrameMessage[] {
    return this.store;
  }

  /** Count of every frame ever appended, trimmed ones included. */
  receivedCount(): number {
    return this.total;
  }

  lastT(): number | null {
    const last = this.store[this.store.length - 1];
    return last === undefined ? null : last.t;
  }

  clear(): void {
    this.store = [];
  }
}
