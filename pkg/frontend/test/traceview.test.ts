import { describe, expect, it } from "vitest";

import { DEFAULT_ZOOM, layoutTimeline, sumField, zoomIn, zoomOut } from "../src/traceview.js";
import { TraceWindowResponse } from "../src/types.js";

import windowFixture from "./fixtures/trace_window.json";
import zoomFixture from "./fixtures/trace_window_zoom.json";

const COARSE = windowFixture as TraceWindowResponse;
const FINE = zoomFixture as TraceWindowResponse;

describe("trace timeline against recorded windows", () => {
  it("draws one bar per fetched window, positioned by timestamp", () => {
    const layout = layoutTimeline(COARSE, 1040, 140);
    expect(layout.bars).toHaveLength(COARSE.windows.length);
    for (const bar of layout.bars) {
      expect(layout.xScale.invert(bar.x)).toBeCloseTo(bar.window.t0_us, 6);
    }
  });

  it("full-span fetch sums to the API totals (no UI-side metric math)", () => {
    for (const resp of [COARSE, FINE]) {
      expect(sumField(resp.windows, "joules")).toBeCloseTo(resp.totals.joules, 9);
      expect(sumField(resp.windows, "interrupts")).toBe(resp.totals.interrupts);
      expect(sumField(resp.windows, "rx_bytes")).toBe(resp.totals.rx_bytes);
    }
  });

  it("zooming refines the window while totals stay identical", () => {
    expect(FINE.window_us).toBeCloseTo(COARSE.window_us / 2, 9);
    expect(FINE.totals.joules).toBeCloseTo(COARSE.totals.joules, 12);
    expect(FINE.totals.interrupts).toBe(COARSE.totals.interrupts);
    expect(FINE.total_windows).toBeGreaterThan(COARSE.total_windows);
  });

  it("zoom-in then zoom-out restores the identical cursor", () => {
    const start = { ...DEFAULT_ZOOM, windowUs: 4000, offset: 6 };
    expect(zoomOut(zoomIn(start))).toEqual(start);
    const twice = zoomOut(zoomOut(zoomIn(zoomIn(start))));
    expect(twice).toEqual(start);
  });

  it("interrupt tick marks appear only where the trace has interrupts", () => {
    const layout = layoutTimeline(COARSE, 1040, 140);
    const withIrqs = COARSE.windows.filter((w) => w.interrupts > 0);
    expect(layout.irqTicks).toHaveLength(withIrqs.length);
    for (const tick of layout.irqTicks) {
      expect(tick.count).toBeGreaterThan(0);
    }
  });
});
