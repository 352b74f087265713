import { describe, expect, it } from "vitest";

import type { FrameMessage } from "../src/protocol.js";
import { TraceBuffer } from "../src/traces.js";

const frame = (t: number): FrameMessage => ({
  type: "frame",
  t,
  gains: [t, t + 1, t + 2, t + 3],
});

describe("TraceBuffer", () => {
  it("keeps every frame of a full gesture in arrival order", () => {
    const buf = new TraceBuffer();
    for (let i = 0; i < 250; i++) buf.append(frame(i * 4));
    expect(buf.frames()).toHaveLength(250);
    expect(buf.receivedCount()).toBe(250);
    expect(buf.frames().map((f) => f.t)).toEqual(
      Array.from({ length: 250 }, (_, i) => i * 4),
    );
  });

  it("trims the oldest frames past capacity but keeps counting", () => {
    const buf = new TraceBuffer(100);
    for (let i = 0; i < 130; i++) buf.append(frame(i));
    expect(buf.frames()).toHaveLength(100);
    expect(buf.frames()[0]!.t).toBe(30);
    expect(buf.lastT()).toBe(129);
    expect(buf.receivedCount()).toBe(130);
  });

  it("starts empty and clears back to empty", () => {
    const buf = new TraceBuffer();
    expect(buf.lastT()).toBeNull();
    buf.append(frame(0));
    buf.clear();
    expect(buf.frames()).toHaveLength(0);
  });

  it("rejects a senseless capacity", () => {
    expect(() => new TraceBuffer(0)).toThrow();
  });
});
