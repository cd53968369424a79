import { describe, expect, it } from "vitest";

import { DEFAULT_STATE, decodeState, encodeState, pointKey } from "../src/state.js";
import { DEFAULT_PARAMS } from "../src/whatif.js";

describe("view state URL serialization", () => {
  it("defaults encode to an empty hash", () => {
    expect(encodeState({ ...DEFAULT_STATE })).toBe("");
  });

  it("round-trips every field", () => {
    const state = {
      ...DEFAULT_STATE,
      sweep: "abc123",
      trace: "def456",
      xMetric: "mean_latency_us",
      yMetric: "interrupt_count",
      deltaMin: 0.5,
      deltaMax: 0.9,
      itrMin: 2,
      itrMax: 50,
      highlight: pointKey(0.7, 8),
      whatif: { ...DEFAULT_PARAMS, alpha: 0.5, p_dyn_w: 35 },
      traceWindowUs: 250,
      traceOffset: 12,
    };
    const decoded = decodeState(encodeState(state));
    expect(decoded).toEqual(state);
  });

  it("tolerates junk values by falling back to defaults", () => {
    const decoded = decodeState("dmin=carrots&w=&wi_alpha=nope");
    expect(decoded.deltaMin).toBe(DEFAULT_STATE.deltaMin);
    expect(decoded.traceWindowUs).toBe(DEFAULT_STATE.traceWindowUs);
    expect(decoded.whatif.alpha).toBe(DEFAULT_PARAMS.alpha);
  });

  it("clamps what-if parameters from the URL into control bounds", () => {
    const decoded = decodeState("wi_alpha=-5&wi_f_detect=3");
    expect(decoded.whatif.alpha).toBeGreaterThan(-1);
    expect(decoded.whatif.f_detect).toBeLessThanOrEqual(1);
  });

  it("leading hash marks are accepted", () => {
    expect(decodeState("#sweep=zz").sweep).toBe("zz");
  });
});
