import { describe, expect, it } from "vitest";

import { argmax, probabilitiesFromLogProbs } from "../src/probs.js";

describe("probabilitiesFromLogProbs", () => {
  it("sums to one and preserves the ranking", () => {
    const lp = [-2.1, -0.3, -4.0, -1.2];
    const p = probabilitiesFromLogProbs(lp);
    expect(p.reduce((a, b) => a + b, 0)).toBeCloseTo(1, 12);
    expect(argmax(p)).toBe(1);
    expect(p.every((x) => x > 0 && x < 1)).toBe(true);
  });

  it("survives large negative magnitudes without underflow to NaN", () => {
    const p = probabilitiesFromLogProbs([-1000, -1001, -999]);
    expect(p.reduce((a, b) => a + b, 0)).toBeCloseTo(1, 12);
    expect(argmax(p)).toBe(2);
  });

  it("recovers the distribution from true log-probabilities", () => {
    const truth = [0.7, 0.2, 0.1];
    const p = probabilitiesFromLogProbs(truth.map(Math.log));
    truth.forEach((x, i) => expect(p[i]).toBeCloseTo(x, 12));
  });

  it("throws on an empty vector", () => {
    expect(() => probabilitiesFromLogProbs([])).toThrow();
  });
});

describe("argmax", () => {
  it("takes the first of tied maxima", () => {
    expect(argmax([1, 3, 3, 2])).toBe(1);
    expect(argmax([5])).toBe(0);
  });
});
