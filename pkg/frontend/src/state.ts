/** View state, URL-serializable so any view can be shared or reloaded. */

import { DEFAULT_PARAMS, WhatIfParams, clampParams } from "./whatif.js";

export interface ViewState {
  sweep: string | null;
  trace: string | null;
  xMetric: string;
  yMetric: string;
  deltaMin: number;
  deltaMax: number;
  itrMin: number;
  itrMax: number;
  highlight: string | null; // "delta/ticks" key of the highlighted point
  whatif: WhatIfParams;
  traceWindowUs: number;
  traceOffset: number;
}

export const DEFAULT_STATE: ViewState = {
  sweep: null,
  trace: null,
  xMetric: "p99_latency_us",
  yMetric: "total_energy_j",
  deltaMin: 0,
  deltaMax: 1,
  itrMin: 0,
  itrMax: Number.MAX_SAFE_INTEGER,
  highlight: null,
  whatif: { ...DEFAULT_PARAMS },
  traceWindowUs: 1000,
  traceOffset: 0,
};

export function pointKey(delta: number, ticks: number): string {
  return `${delta}/${ticks}`;
}

export function encodeState(s: ViewState): string {
  const q = new URLSearchParams();
  const d = DEFAULT_STATE;
  if (s.sweep) q.set("sweep", s.sweep);
  if (s.trace) q.set("trace", s.trace);
  if (s.xMetric !== d.xMetric) q.set("x", s.xMetric);
  if (s.yMetric !== d.yMetric) q.set("y", s.yMetric);
  if (s.deltaMin !== d.deltaMin) q.set("dmin", String(s.deltaMin));
  if (s.deltaMax !== d.deltaMax) q.set("dmax", String(s.deltaMax));
  if (s.itrMin !== d.itrMin) q.set("imin", String(s.itrMin));
  if (s.itrMax !== d.itrMax) q.set("imax", String(s.itrMax));
  if (s.highlight) q.set("hl", s.highlight);
  if (s.traceWindowUs !== d.traceWindowUs) q.set("w", String(s.traceWindowUs));
  if (s.traceOffset !== d.traceOffset) q.set("woff", String(s.traceOffset));
  for (const [key, value] of Object.entries(s.whatif)) {
    if (value !== DEFAULT_PARAMS[key as keyof WhatIfParams]) {
      q.set(`wi_${key}`, String(value));
    }
  }
  return q.toString();
}

function num(q: URLSearchParams, key: string, fallback: number): number {
  const raw = q.get(key);
  if (raw === null || raw.trim() === "") return fallback;
  const v = Number(raw);
  return Number.isFinite(v) ? v : fallback;
}

export function decodeState(hash: string): ViewState {
  const q = new URLSearchParams(hash.replace(/^#/, ""));
  const d = DEFAULT_STATE;
  const whatif: WhatIfParams = { ...DEFAULT_PARAMS };
  for (const key of Object.keys(DEFAULT_PARAMS) as Array<keyof WhatIfParams>) {
    whatif[key] = num(q, `wi_${key}`, DEFAULT_PARAMS[key]);
  }
  return {
    sweep: q.get("sweep"),
    trace: q.get("trace"),
    xMetric: q.get("x") ?? d.xMetric,
    yMetric: q.get("y") ?? d.yMetric,
    deltaMin: num(q, "dmin", d.deltaMin),
    deltaMax: num(q, "dmax", d.deltaMax),
    itrMin: num(q, "imin", d.itrMin),
    itrMax: num(q, "imax", d.itrMax),
    highlight: q.get("hl"),
    whatif: clampParams(whatif),
    traceWindowUs: num(q, "w", d.traceWindowUs),
    traceOffset: num(q, "woff", d.traceOffset),
  };
}
