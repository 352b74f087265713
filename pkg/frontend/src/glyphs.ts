/**
 * Reference strokes for the gesture chart, one per class the service
 * knows. Coordinates are normalized pad space: u rightward, v downward,
 * both in [0, 1]. These are drawing guides for the user, not the
 * classifier's templates; labels the server reports but this chart
 * lacks simply render as text.
 */

export type Stroke = Array<[number, number]>;

function arc(
  cu: number,
  cv: number,
  r: number,
  startDeg: number,
  endDeg: number,
  steps = 24,
): Stroke {
  const pts: Stroke = [];
  for (let i = 0; i <= steps; i++) {
    const a = ((startDeg + ((endDeg - startDeg) * i) / steps) * Math.PI) / 180;
    pts.push([cu + r * Math.cos(a), cv + r * Math.sin(a)]);
  }
  return pts;
}

export const GLYPH_STROKES: Record<string, Stroke[]> = {
  "3": [[...arc(0.45, 0.3, 0.18, -120, 90), ...arc(0.45, 0.68, 0.2, -90, 120)]],
  "5": [
    [
      [0.68, 0.15],
      [0.35, 0.15],
      [0.32, 0.45],
      ...arc(0.48, 0.65, 0.22, -100, 150),
    ],
  ],
  I: [
    [
      [0.5, 0.15],
      [0.5, 0.85],
    ],
  ],
  J: [
    [
      [0.6, 0.15],
      [0.6, 0.65],
      ...arc(0.45, 0.65, 0.15, 0, 180),
    ],
  ],
  L: [
    [
      [0.35, 0.15],
      [0.35, 0.8],
      [0.7, 0.8],
    ],
  ],
  M: [
    [
      [0.25, 0.85],
      [0.25, 0.2],
      [0.5, 0.6],
      [0.75, 0.2],
      [0.75, 0.85],
    ],
  ],
  O: [arc(0.5, 0.5, 0.3, -90, 270)],
  S: [[...arc(0.5, 0.33, 0.17, -60, 180), ...arc(0.5, 0.67, 0.17, 0, 240)]],
  V: [
    [
      [0.3, 0.2],
      [0.5, 0.82],
      [0.7, 0.2],
    ],
  ],
  W: [
    [
      [0.22, 0.2],
      [0.37, 0.82],
      [0.5, 0.45],
      [0.63, 0.82],
      [0.78, 0.2],
    ],
  ],
  Z: [
    [
      [0.3, 0.2],
      [0.7, 0.2],
      [0.3, 0.8],
      [0.7, 0.8],
    ],
  ],
  "?": [
    [...arc(0.5, 0.32, 0.16, 150, 400), [0.5, 0.62]],
    [
      [0.5, 0.78],
      [0.5, 0.84],
    ],
  ],
};
