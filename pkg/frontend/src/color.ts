/** Color maps for the two figure kinds: a diverging map centered at zero
 * for percentage changes and a sequential map for raw MSE values.
 */

export type Rgb = [number, number, number];

const NEGATIVE: Rgb = [33, 102, 172]; // blue
const MIDPOINT: Rgb = [247, 247, 247];
const POSITIVE: Rgb = [178, 24, 43]; // red

const SEQ_LOW: Rgb = [247, 251, 255];
const SEQ_HIGH: Rgb = [8, 48, 107];

function lerp(a: Rgb, b: Rgb, t: number): Rgb {
  return [0, 1, 2].map((i) => Math.round(a[i] + (b[i] - a[i]) * t)) as Rgb;
}

export function hex(c: Rgb): string {
  return "#" + c.map((v) => v.toString(16).padStart(2, "0")).join("");
}

/** Map value in [-bound, bound] to blue-white-red, clamping outside. */
export function diverging(value: number, bound: number): string {
  const t = Math.max(-1, Math.min(1, bound > 0 ? value / bound : 0));
  return hex(t < 0 ? lerp(MIDPOINT, NEGATIVE, -t) : lerp(MIDPOINT, POSITIVE, t));
}

/** Map value in [lo, hi] to light-to-dark blue, clamping outside. */
export function sequential(value: number, lo: number, hi: number): string {
  const t = hi > lo ? Math.max(0, Math.min(1, (value - lo) / (hi - lo))) : 0.5;
  return hex(lerp(SEQ_LOW, SEQ_HIGH, t));
}

/** Black on light fills, white on dark, for readable annotations. */
export function textColor(fill: string): string {
  const r = parseInt(fill.slice(1, 3), 16);
  const g = parseInt(fill.slice(3, 5), 16);
  const b = parseInt(fill.slice(5, 7), 16);
  return 0.299 * r + 0.587 * g + 0.114 * b > 140 ? "#000000" : "#ffffff";
}
