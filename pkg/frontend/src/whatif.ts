/** What-if panel: slider parameters -> /model/eval request -> overlay.
 * Every plotted or displayed number comes straight from the API response;
 * this module only builds requests and scales responses to pixels. */

import { LinearScale, extent, padded, scaleLinear } from "./scale.js";
import { CurvePoint } from "./types.js";

export interface WhatIfParams {
  alpha: number;
  beta: number;
  f_detect: number;
  f_work_max: number;
  p_static_w: number;
  p_dyn_w: number;
}

export const DEFAULT_PARAMS: WhatIfParams = {
  alpha: 0,
  beta: 0,
  f_detect: 0.1,
  f_work_max: 0.5,
  p_static_w: 10,
  p_dyn_w: 20,
};

/** Control bounds keep requests inside the model's validity ranges
 * (alpha > -1, beta > -2, fractions in [0,1], powers >= 0). */
export const PARAM_BOUNDS: Record<keyof WhatIfParams, { min: number; max: number; step: number }> = {
  alpha: { min: -0.95, max: 3, step: 0.05 },
  beta: { min: -1.95, max: 3, step: 0.05 },
  f_detect: { min: 0, max: 1, step: 0.01 },
  f_work_max: { min: 0, max: 1, step: 0.01 },
  p_static_w: { min: 0, max: 100, step: 0.5 },
  p_dyn_w: { min: 0, max: 100, step: 0.5 },
};

export function clampParams(p: WhatIfParams): WhatIfParams {
  const out = { ...p };
  for (const key of Object.keys(PARAM_BOUNDS) as Array<keyof WhatIfParams>) {
    const b = PARAM_BOUNDS[key];
    out[key] = Math.min(b.max, Math.max(b.min, out[key]));
  }
  return out;
}

export function defaultDeltaGrid(n = 40): number[] {
  const out: number[] = [];
  for (let i = 1; i <= n; i++) out.push(Number(((i / n) * 0.95 + 0.05).toFixed(6)));
  return out;
}

/** Body for POST /api/v1/model/eval. */
export function evalRequestBody(params: WhatIfParams, deltaGrid: number[]): object {
  return {
    scenario: {
      f_detect: params.f_detect,
      f_work_max: params.f_work_max,
      alpha: params.alpha,
      beta: params.beta,
      power: { p_static_w: params.p_static_w, p_dyn_w: params.p_dyn_w },
    },
    delta_grid: deltaGrid,
  };
}

export interface CurveOverlay {
  path: Array<{ x: number; y: number; point: CurvePoint }>;
  xScale: LinearScale;
  yScale: LinearScale;
}

/** Scale the normalized (latency, energy) curve into a pixel pane. */
export function layoutCurve(points: CurvePoint[], width: number, height: number): CurveOverlay {
  const xs = points.map((p) => p.norm_latency);
  const ys = points.map((p) => p.norm_energy);
  const xScale = scaleLinear(padded(extent(xs)), [0, width]);
  const yScale = scaleLinear(padded(extent(ys)), [height, 0]);
  const path = points
    .slice()
    .sort((a, b) => a.norm_latency - b.norm_latency)
    .map((p) => ({ x: xScale(p.norm_latency), y: yScale(p.norm_energy), point: p }));
  return { path, xScale, yScale };
}
