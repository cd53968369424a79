/** Trace timeline: windowed aggregates as bars, interrupts as tick marks,
 * zooming by re-querying at a finer window size. */

import { LinearScale, scaleLinear } from "./scale.js";
import { TraceWindow, TraceWindowResponse } from "./types.js";

export interface TimelineBar {
  x: number;
  w: number;
  h: number;
  y: number;
  window: TraceWindow;
}

export interface IrqTick {
  x: number;
  count: number;
}

export interface TimelineLayout {
  bars: TimelineBar[];
  irqTicks: IrqTick[];
  xScale: LinearScale;
  field: keyof TraceWindow;
}

export function layoutTimeline(
  resp: TraceWindowResponse,
  width: number,
  height: number,
  field: keyof TraceWindow = "joules",
): TimelineLayout {
  const xScale = scaleLinear([0, resp.span_us], [0, width]);
  const peak = Math.max(...resp.windows.map((w) => w[field] as number), 0) || 1;
  const bars = resp.windows.map((w) => {
    const h = ((w[field] as number) / peak) * (height - 14);
    return {
      x: xScale(w.t0_us),
      w: Math.max(1, xScale(w.t1_us) - xScale(w.t0_us) - 1),
      h,
      y: height - h,
      window: w,
    };
  });
  const irqTicks = resp.windows
    .filter((w) => w.interrupts > 0)
    .map((w) => ({ x: xScale((w.t0_us + w.t1_us) / 2), count: w.interrupts }));
  return { bars, irqTicks, xScale, field };
}

export interface ZoomCursor {
  windowUs: number;
  offset: number; // window index for pagination
  limit: number;
}

export const DEFAULT_ZOOM: ZoomCursor = { windowUs: 1000, offset: 0, limit: 500 };

/** Halve the window size; window indexes double so the view stays put. */
export function zoomIn(c: ZoomCursor): ZoomCursor {
  return { windowUs: c.windowUs / 2, offset: c.offset * 2, limit: c.limit };
}

/** Inverse of zoomIn: doubling the window restores the previous cursor. */
export function zoomOut(c: ZoomCursor): ZoomCursor {
  return { windowUs: c.windowUs * 2, offset: Math.floor(c.offset / 2), limit: c.limit };
}

/** Sum a field over fetched windows; used only to cross-check against the
 * API's totals object, never to display derived numbers. */
export function sumField(windows: TraceWindow[], field: keyof TraceWindow): number {
  return windows.reduce((acc, w) => acc + (w[field] as number), 0);
}
