/** Probability helpers for the prediction panel. */

/**
 * Softmax over log-probabilities, numerically shifted. The output always
 * sums to 1 exactly up to floating error, even if the inputs drifted.
 */
export function probabilitiesFromLogProbs(logProbs: number[]): number[] {
  if (logProbs.length === 0) throw new Error("empty log-probability vector");
  const m = Math.max(...logProbs);
  const exps = logProbs.map((lp) => Math.exp(lp - m));
  const total = exps.reduce((a, b) => a + b, 0);
  return exps.map((e) => e / total);
}

export function argmax(xs: number[]): number {
  let best = 0;
  for (let i = 1; i < xs.length; i++) {
    if (xs[i]! > xs[best]!) best = i;
  }
  return best;
}
