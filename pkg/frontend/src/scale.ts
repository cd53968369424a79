/** Minimal linear scales; the explorer does no metric math beyond mapping
 * API values to pixels. */

export interface LinearScale {
  (x: number): number;
  invert(y: number): number;
  domain: [number, number];
  range: [number, number];
}

export function scaleLinear(domain: [number, number], range: [number, number]): LinearScale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const fn = ((x: number) => r0 + ((x - d0) / span) * (r1 - r0)) as LinearScale;
  fn.invert = (y: number) => d0 + ((y - r0) / (r1 - r0 || 1)) * span;
  fn.domain = domain;
  fn.range = range;
  return fn;
}

export function extent(values: number[]): [number, number] {
  if (values.length === 0) return [0, 1];
  let lo = values[0];
  let hi = values[0];
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === hi) {
    // degenerate domain: pad so points land mid-range
    const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.05 : 1;
    return [lo - pad, hi + pad];
  }
  return [lo, hi];
}

export function padded(e: [number, number], frac = 0.06): [number, number] {
  const pad = (e[1] - e[0]) * frac;
  return [e[0] - pad, e[1] + pad];
}
