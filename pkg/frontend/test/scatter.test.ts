import { describe, expect, it } from "vitest";

import { NO_FILTER, layoutScatter, passesFilters } from "../src/scatter.js";
import { luminanceForDelta } from "../src/encoding.js";
import { MarkersResponse, SweepPointsResponse } from "../src/types.js";

import pointsFixture from "./fixtures/sweep_points.json";
import markersFixture from "./fixtures/markers.json";

const POINTS = (pointsFixture as SweepPointsResponse).points;
const MARKERS = markersFixture as MarkersResponse;
const AXES = { x: "p99_latency_us", y: "total_energy_j" };
const W = 640;
const H = 420;

describe("scatter layout against recorded API fixtures", () => {
  it("places one dot per API point at the scaled metric position", () => {
    const layout = layoutScatter(POINTS, MARKERS, AXES, NO_FILTER, W, H);
    expect(layout.empty).toBe(false);
    expect(layout.dots).toHaveLength(POINTS.length);
    for (const dot of layout.dots) {
      expect(layout.xScale.invert(dot.x)).toBeCloseTo(
        dot.point.metrics[AXES.x].mean, 6);
      expect(layout.yScale.invert(dot.y)).toBeCloseTo(
        dot.point.metrics[AXES.y].mean, 6);
    }
  });

  it("marker glyph coordinates equal the API marker points", () => {
    const layout = layoutScatter(POINTS, MARKERS, AXES, NO_FILTER, W, H);
    const byGlyph = new Map(layout.markers.map((m) => [m.glyph, m]));
    const x = byGlyph.get("X")!;
    expect(layout.xScale.invert(x.x)).toBeCloseTo(
      MARKERS.markers.min_energy.metrics[AXES.x].mean, 6);
    expect(layout.yScale.invert(x.y)).toBeCloseTo(
      MARKERS.markers.min_energy.metrics[AXES.y].mean, 6);
    const plus = byGlyph.get("+")!;
    expect(layout.xScale.invert(plus.x)).toBeCloseTo(
      MARKERS.markers.min_latency.metrics[AXES.x].mean, 6);
    expect(plus.point.delta).toBe(MARKERS.markers.min_latency.delta);
    expect(plus.point.itr_ticks).toBe(MARKERS.markers.min_latency.itr_ticks);
    // open-loop fixture: no efficiency marker
    expect(byGlyph.has("O")).toBe(MARKERS.markers.best_efficiency !== undefined);
  });

  it("marker glyphs sit exactly on their corresponding dots", () => {
    const layout = layoutScatter(POINTS, MARKERS, AXES, NO_FILTER, W, H);
    for (const glyph of layout.markers) {
      const dot = layout.dots.find(
        (d) => d.point.delta === glyph.point.delta &&
               d.point.itr_ticks === glyph.point.itr_ticks);
      expect(dot).toBeDefined();
      expect(glyph.x).toBeCloseTo(dot!.x, 9);
      expect(glyph.y).toBeCloseTo(dot!.y, 9);
    }
  });

  it("dot radius is monotone in itr ticks, luminance monotone in delta", () => {
    const layout = layoutScatter(POINTS, MARKERS, AXES, NO_FILTER, W, H);
    const sortedByTicks = [...layout.dots].sort(
      (a, b) => a.point.itr_ticks - b.point.itr_ticks);
    for (let i = 1; i < sortedByTicks.length; i++) {
      const prev = sortedByTicks[i - 1];
      const cur = sortedByTicks[i];
      if (cur.point.itr_ticks > prev.point.itr_ticks) {
        expect(cur.r).toBeGreaterThan(prev.r);
      } else {
        expect(cur.r).toBe(prev.r);
      }
    }
    const sortedByDelta = [...layout.dots].sort(
      (a, b) => a.point.delta - b.point.delta);
    for (let i = 1; i < sortedByDelta.length; i++) {
      const prev = sortedByDelta[i - 1];
      const cur = sortedByDelta[i];
      if (cur.point.delta > prev.point.delta) {
        expect(luminanceForDelta(cur.point.delta)).toBeGreaterThan(
          luminanceForDelta(prev.point.delta));
      }
    }
  });

  it("delta-range filters hide exactly the excluded points", () => {
    const filters = { ...NO_FILTER, deltaMin: 0.6, deltaMax: 1.0 };
    const layout = layoutScatter(POINTS, MARKERS, AXES, filters, W, H);
    const expected = POINTS.filter((p) => p.delta >= 0.6);
    expect(layout.dots.map((d) => d.point)).toEqual(expected);
    for (const p of POINTS) {
      expect(passesFilters(p, filters)).toBe(p.delta >= 0.6);
    }
    // a filtered-out marker is not drawn
    const markerDeltas = layout.markers.map((m) => m.point.delta);
    for (const d of markerDeltas) expect(d).toBeGreaterThanOrEqual(0.6);
  });

  it("renders an explicit empty state when everything is filtered out", () => {
    const layout = layoutScatter(POINTS, MARKERS, AXES,
      { ...NO_FILTER, deltaMin: 0.99, deltaMax: 0.991 }, W, H);
    expect(layout.empty).toBe(true);
    expect(layout.dots).toHaveLength(0);
    expect(layoutScatter([], null, AXES, NO_FILTER, W, H).empty).toBe(true);
  });
});
