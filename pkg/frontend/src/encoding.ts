/** The figure grammar: interrupt delay -> dot size, DVFS -> luminance.
 *
 * Bigger dots mean more interrupt delay; darker dots mean a slower
 * processor.  Both mappings are strictly monotone so the contract tests
 * can verify them on any rendered point set.
 */

export const R_MIN = 3;
export const R_MAX = 14;

/** Radius strictly increasing in itr ticks, rank-scaled over the ticks
 * present in the sweep so coarse grids still spread visually. */
export function radiusByTicks(allTicks: number[]): (ticks: number) => number {
  const uniq = Array.from(new Set(allTicks)).sort((a, b) => a - b);
  const n = uniq.length;
  return (ticks: number) => {
    const rank = uniq.indexOf(ticks);
    if (rank < 0) return R_MIN;
    if (n === 1) return (R_MIN + R_MAX) / 2;
    return R_MIN + (rank * (R_MAX - R_MIN)) / (n - 1);
  };
}

/** Luminance in [18, 82]%, strictly increasing in delta: slow = dark. */
export function luminanceForDelta(delta: number): number {
  const clamped = Math.min(1, Math.max(0, delta));
  return 18 + 64 * clamped;
}

export function colorForDelta(delta: number): string {
  return `hsl(215, 65%, ${luminanceForDelta(delta)}%)`;
}

/** Display rounding used everywhere a number is shown; values themselves
 * always come from API responses. */
export function fmt(x: number, digits = 4): string {
  if (!isFinite(x)) return String(x);
  if (x !== 0 && (Math.abs(x) < 1e-3 || Math.abs(x) >= 1e6)) {
    return x.toExponential(digits - 1);
  }
  return Number(x.toPrecision(digits)).toString();
}
