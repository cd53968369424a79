/** Explorer wiring: dropdowns -> API queries -> pure layouts -> SVG. */

import { ApiClient } from "./api.js";
import { clear, el, svgEl } from "./dom.js";
import { fmt } from "./encoding.js";
import { DEFAULT_STATE, ViewState, decodeState, encodeState, pointKey } from "./state.js";
import { Filters, layoutScatter, MarkerGlyph } from "./scatter.js";
import { DEFAULT_ZOOM, layoutTimeline, sumField, zoomIn, zoomOut, ZoomCursor } from "./traceview.js";
import { MarkersResponse, SweepPoint, TraceWindowResponse } from "./types.js";
import {
  defaultDeltaGrid,
  evalRequestBody,
  layoutCurve,
  PARAM_BOUNDS,
  WhatIfParams,
} from "./whatif.js";

const SCATTER_W = 640;
const SCATTER_H = 420;
const CURVE_W = 360;
const CURVE_H = 260;
const TIMELINE_W = 1040;
const TIMELINE_H = 140;

const api = new ApiClient("");
let state: ViewState = decodeState(location.hash);
let points: SweepPoint[] = [];
let markers: MarkersResponse | null = null;
let traceResp: TraceWindowResponse | null = null;
let zoom: ZoomCursor = { ...DEFAULT_ZOOM, windowUs: state.traceWindowUs, offset: state.traceOffset };
let evalSeq = 0; // last-write-wins over in-flight what-if queries

function pushState(): void {
  history.replaceState(null, "", "#" + encodeState(state));
}

function filters(): Filters {
  return {
    deltaMin: state.deltaMin,
    deltaMax: state.deltaMax,
    itrMin: state.itrMin,
    itrMax: state.itrMax,
  };
}

function markerShape(g: MarkerGlyph): SVGElement {
  const group = svgEl("g", { transform: `translate(${g.x},${g.y})`, class: "marker" });
  if (g.glyph === "X") {
    group.appendChild(svgEl("path", { d: "M-7,-7 L7,7 M-7,7 L7,-7", class: "glyph-x" }));
  } else if (g.glyph === "+") {
    group.appendChild(svgEl("path", { d: "M0,-9 L0,9 M-9,0 L9,0", class: "glyph-plus" }));
  } else {
    group.appendChild(svgEl("circle", { r: "8", class: "glyph-o" }));
  }
  const label = { X: "min energy", "+": "min latency", O: "best efficiency" }[g.glyph];
  group.appendChild(svgEl("title")).textContent =
    `${label}: delta=${g.point.delta} itr=${g.point.itr_ticks}`;
  return group;
}

function renderScatter(): void {
  const host = document.getElementById("scatter")!;
  clear(host);
  const layout = layoutScatter(points, markers, { x: state.xMetric, y: state.yMetric },
    filters(), SCATTER_W, SCATTER_H);
  if (layout.empty) {
    host.appendChild(el("p", { class: "empty" },
      points.length === 0
        ? "No sweep selected, or the sweep has no points."
        : "Every point is filtered out; widen the delta/ITR ranges."));
    return;
  }
  const svg = svgEl("svg", {
    width: String(SCATTER_W), height: String(SCATTER_H),
    viewBox: `0 0 ${SCATTER_W} ${SCATTER_H}`,
  });
  for (const dot of layout.dots) {
    const key = pointKey(dot.point.delta, dot.point.itr_ticks);
    const c = svgEl("circle", {
      cx: String(dot.x), cy: String(dot.y), r: String(dot.r), fill: dot.color,
      class: "dot" + (state.highlight === key ? " highlight" : ""),
    });
    c.appendChild(svgEl("title")).textContent =
      `delta=${dot.point.delta} itr=${dot.point.itr_ticks}\n` +
      `${state.xMetric}=${fmt(dot.point.metrics[state.xMetric].mean)}\n` +
      `${state.yMetric}=${fmt(dot.point.metrics[state.yMetric].mean)}`;
    c.addEventListener("click", () => {
      state = { ...state, highlight: key };
      pushState();
      renderScatter();
      renderDetail(dot.point);
    });
    svg.appendChild(c);
  }
  for (const glyph of layout.markers) svg.appendChild(markerShape(glyph));
  host.appendChild(svg);
}

function renderDetail(p: SweepPoint): void {
  const host = document.getElementById("detail")!;
  clear(host);
  host.appendChild(el("h3", {}, `delta=${p.delta}, itr=${p.itr_ticks}`));
  const table = el("table");
  for (const [name, stats] of Object.entries(p.metrics)) {
    const row = el("tr");
    row.appendChild(el("td", {}, name));
    row.appendChild(el("td", {}, fmt(stats.mean)));
    row.appendChild(el("td", {}, `[${fmt(stats.min)}, ${fmt(stats.max)}]`));
    table.appendChild(row);
  }
  host.appendChild(table);
}

async function refreshSweep(): Promise<void> {
  if (!state.sweep) return;
  const [pts, mk] = await Promise.all([
    api.sweepPoints(state.sweep),
    api.markers(state.sweep),
  ]);
  points = pts.points;
  markers = mk;
  renderScatter();
}

async function refreshWhatIf(): Promise<void> {
  const seq = ++evalSeq;
  const host = document.getElementById("whatif-plot")!;
  const errHost = document.getElementById("whatif-error")!;
  const result = await api.evalModel(evalRequestBody(state.whatif, defaultDeltaGrid()));
  if (seq !== evalSeq) return; // a newer slider value is already in flight
  clear(errHost);
  if (!result.ok) {
    errHost.appendChild(el("span", { class: "error" },
      `${result.error.field}: ${result.error.message}`));
    return;
  }
  clear(host);
  const layout = layoutCurve(result.value.points, CURVE_W, CURVE_H);
  const svg = svgEl("svg", {
    width: String(CURVE_W), height: String(CURVE_H),
    viewBox: `0 0 ${CURVE_W} ${CURVE_H}`,
  });
  const d = layout.path.map((p, i) => `${i === 0 ? "M" : "L"}${p.x},${p.y}`).join(" ");
  svg.appendChild(svgEl("path", { d, class: "curve" }));
  for (const p of layout.path) {
    const c = svgEl("circle", { cx: String(p.x), cy: String(p.y), r: "2.5", class: "curve-pt" });
    c.appendChild(svgEl("title")).textContent =
      `delta=${p.point.delta}\nnorm_latency=${fmt(p.point.norm_latency)}\n` +
      `norm_energy=${fmt(p.point.norm_energy)}`;
    svg.appendChild(c);
  }
  host.appendChild(svg);
}

async function refreshTrace(): Promise<void> {
  if (!state.trace) return;
  const host = document.getElementById("timeline")!;
  try {
    traceResp = await api.traceWindow(state.trace, zoom.windowUs, zoom.offset, zoom.limit);
  } catch (err) {
    clear(host);
    host.appendChild(el("p", { class: "error" },
      `trace ${state.trace} unavailable (${err}); pick another from the list`));
    return;
  }
  clear(host);
  const layout = layoutTimeline(traceResp, TIMELINE_W, TIMELINE_H);
  const svg = svgEl("svg", {
    width: String(TIMELINE_W), height: String(TIMELINE_H),
    viewBox: `0 0 ${TIMELINE_W} ${TIMELINE_H}`,
  });
  for (const bar of layout.bars) {
    const r = svgEl("rect", {
      x: String(bar.x), y: String(bar.y), width: String(bar.w),
      height: String(bar.h), class: "bar",
    });
    r.appendChild(svgEl("title")).textContent =
      `[${fmt(bar.window.t0_us)}, ${fmt(bar.window.t1_us)}) us\n` +
      `joules=${fmt(bar.window.joules)}\ninterrupts=${bar.window.interrupts}\n` +
      `rx_bytes=${bar.window.rx_bytes}`;
    svg.appendChild(r);
  }
  for (const tick of layout.irqTicks) {
    svg.appendChild(svgEl("line", {
      x1: String(tick.x), x2: String(tick.x), y1: "0", y2: "10", class: "irq-tick",
    }));
  }
  host.appendChild(svg);
  const totals = document.getElementById("timeline-totals")!;
  clear(totals);
  totals.appendChild(el("span", {},
    `window ${fmt(zoom.windowUs)} us | fetched joules ` +
    `${fmt(sumField(traceResp.windows, "joules"))} of ${fmt(traceResp.totals.joules)} total | ` +
    `interrupts ${traceResp.totals.interrupts} | itr_ticks ${traceResp.itr_ticks}`));
}

function bindControls(): void {
  const xSel = document.getElementById("x-metric") as HTMLSelectElement;
  const ySel = document.getElementById("y-metric") as HTMLSelectElement;
  xSel.value = state.xMetric;
  ySel.value = state.yMetric;
  xSel.addEventListener("change", () => {
    state = { ...state, xMetric: xSel.value };
    pushState();
    renderScatter();
  });
  ySel.addEventListener("change", () => {
    state = { ...state, yMetric: ySel.value };
    pushState();
    renderScatter();
  });
  for (const [id, key] of [["delta-min", "deltaMin"], ["delta-max", "deltaMax"],
                           ["itr-min", "itrMin"], ["itr-max", "itrMax"]] as const) {
    const input = document.getElementById(id) as HTMLInputElement;
    const current = state[key];
    if (Number.isFinite(current) && current !== Number.MAX_SAFE_INTEGER) {
      input.value = String(current);
    }
    input.addEventListener("change", () => {
      const v = input.value === "" ?
        (key === "deltaMax" ? 1 : key === "itrMax" ? Number.MAX_SAFE_INTEGER : 0)
        : Number(input.value);
      state = { ...state, [key]: v };
      pushState();
      renderScatter();
    });
  }
  const panel = document.getElementById("whatif-controls")!;
  for (const key of Object.keys(PARAM_BOUNDS) as Array<keyof WhatIfParams>) {
    const bounds = PARAM_BOUNDS[key];
    const row = el("label", { class: "slider-row" }, key + " ");
    const input = el("input", {
      type: "range", min: String(bounds.min), max: String(bounds.max),
      step: String(bounds.step), value: String(state.whatif[key]),
    });
    const value = el("span", { class: "slider-value" }, fmt(state.whatif[key]));
    input.addEventListener("input", () => {
      state = { ...state, whatif: { ...state.whatif, [key]: Number(input.value) } };
      value.textContent = fmt(Number(input.value));
      pushState();
      void refreshWhatIf();
    });
    row.appendChild(input);
    row.appendChild(value);
    panel.appendChild(row);
  }
  document.getElementById("zoom-in")!.addEventListener("click", () => {
    zoom = zoomIn(zoom);
    state = { ...state, traceWindowUs: zoom.windowUs, traceOffset: zoom.offset };
    pushState();
    void refreshTrace();
  });
  document.getElementById("zoom-out")!.addEventListener("click", () => {
    zoom = zoomOut(zoom);
    state = { ...state, traceWindowUs: zoom.windowUs, traceOffset: zoom.offset };
    pushState();
    void refreshTrace();
  });
}

async function populateLists(): Promise<void> {
  const sweepSel = document.getElementById("sweep-select") as HTMLSelectElement;
  const traceSel = document.getElementById("trace-select") as HTMLSelectElement;
  const [sweeps, traces] = await Promise.all([api.listSweeps(), api.listTraces()]);
  for (const s of sweeps.sweeps) {
    const label = s.names[0] ?? s.digest.slice(0, 12);
    sweepSel.appendChild(el("option", { value: s.digest },
      `${label} (${s.workload_kind}, ${s.points} pts)`));
  }
  for (const t of traces.traces) {
    const label = t.names[0] ?? t.digest.slice(0, 12);
    traceSel.appendChild(el("option", { value: t.digest },
      `${label} (${fmt(t.span_us)} us, ${t.interrupts} irqs)`));
  }
  if (!state.sweep && sweeps.sweeps.length > 0) state.sweep = sweeps.sweeps[0].digest;
  if (!state.trace && traces.traces.length > 0) state.trace = traces.traces[0].digest;
  if (state.sweep) sweepSel.value = state.sweep;
  if (state.trace) traceSel.value = state.trace;
  sweepSel.addEventListener("change", () => {
    state = { ...state, sweep: sweepSel.value, highlight: null };
    pushState();
    void refreshSweep();
  });
  traceSel.addEventListener("change", () => {
    state = { ...state, trace: traceSel.value };
    zoom = { ...DEFAULT_ZOOM };
    pushState();
    void refreshTrace();
  });
  pushState();
}

async function start(): Promise<void> {
  bindControls();
  await populateLists();
  await Promise.all([refreshSweep(), refreshWhatIf(), refreshTrace()]);
}

window.addEventListener("hashchange", () => {
  state = decodeState(location.hash);
  zoom = { ...zoom, windowUs: state.traceWindowUs, offset: state.traceOffset };
  renderScatter();
  void refreshWhatIf();
  void refreshTrace();
});

void start();

export { DEFAULT_STATE }; // keeps this module import-safe for tooling
