/** Pure layout for the sweep scatter: API points -> positioned primitives.
 * Rendering (dom.ts consumers) only draws what this computes, so tests can
 * check the visual contract without a browser. */

import { colorForDelta, radiusByTicks } from "./encoding.js";
import { LinearScale, extent, padded, scaleLinear } from "./scale.js";
import { MarkersResponse, SweepPoint } from "./types.js";

export interface AxisChoice {
  x: string; // metric name, e.g. p99_latency_us
  y: string; // metric name, e.g. total_energy_j
}

export interface Filters {
  deltaMin: number;
  deltaMax: number;
  itrMin: number;
  itrMax: number;
}

export const NO_FILTER: Filters = {
  deltaMin: 0,
  deltaMax: 1,
  itrMin: 0,
  itrMax: Number.MAX_SAFE_INTEGER,
};

export interface ScatterDot {
  x: number;
  y: number;
  r: number;
  color: string;
  point: SweepPoint;
}

export type Glyph = "X" | "+" | "O";

export interface MarkerGlyph {
  glyph: Glyph;
  x: number;
  y: number;
  point: SweepPoint;
}

export interface ScatterLayout {
  dots: ScatterDot[];
  markers: MarkerGlyph[];
  xScale: LinearScale;
  yScale: LinearScale;
  empty: boolean;
}

export function passesFilters(p: SweepPoint, f: Filters): boolean {
  return (
    p.delta >= f.deltaMin &&
    p.delta <= f.deltaMax &&
    p.itr_ticks >= f.itrMin &&
    p.itr_ticks <= f.itrMax
  );
}

function metric(p: SweepPoint, name: string): number {
  const m = p.metrics[name];
  if (m === undefined) throw new Error(`point has no metric ${name}`);
  return m.mean;
}

export function layoutScatter(
  points: SweepPoint[],
  markers: MarkersResponse | null,
  axes: AxisChoice,
  filters: Filters,
  width: number,
  height: number,
): ScatterLayout {
  const visible = points.filter((p) => passesFilters(p, filters));
  if (visible.length === 0) {
    return {
      dots: [],
      markers: [],
      xScale: scaleLinear([0, 1], [0, width]),
      yScale: scaleLinear([0, 1], [height, 0]),
      empty: true,
    };
  }
  const xs = visible.map((p) => metric(p, axes.x));
  const ys = visible.map((p) => metric(p, axes.y));
  const xScale = scaleLinear(padded(extent(xs)), [0, width]);
  const yScale = scaleLinear(padded(extent(ys)), [height, 0]); // y grows upward
  const radius = radiusByTicks(visible.map((p) => p.itr_ticks));

  const dots = visible.map((p) => ({
    x: xScale(metric(p, axes.x)),
    y: yScale(metric(p, axes.y)),
    r: radius(p.itr_ticks),
    color: colorForDelta(p.delta),
    point: p,
  }));

  const glyphs: MarkerGlyph[] = [];
  if (markers) {
    const entries: Array<[Glyph, SweepPoint | undefined]> = [
      ["X", markers.markers.min_energy],
      ["+", markers.markers.min_latency],
      ["O", markers.markers.best_efficiency],
    ];
    for (const [glyph, point] of entries) {
      if (point && passesFilters(point, filters)) {
        glyphs.push({
          glyph,
          x: xScale(metric(point, axes.x)),
          y: yScale(metric(point, axes.y)),
          point,
        });
      }
    }
  }
  return { dots, markers: glyphs, xScale, yScale, empty: false };
}
