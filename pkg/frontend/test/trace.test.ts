import { describe, expect, it } from "vitest";
import type { Trace } from "../src/protocol.js";
import { fmtVal, traceRows, traceSummary } from "../src/trace.js";

const TRACE: Trace = {
  prev: "GoAlone",
  fired: 1,
  branches: [
    {
      result: "Pass",
      literals: [
        { lhs_text: "s_d", lhs: 0.2, op: ">", param: "a1", threshold: 0.5, holds: false },
      ],
    },
    {
      result: "Halt",
      literals: [
        { lhs_text: "norm(p_h)", lhs: 2.13, op: "<", param: "d0", threshold: 3.0, holds: true },
        { lhs_text: "start", lhs: "GoAlone", op: "==", param: null, threshold: "GoAlone", holds: true },
      ],
    },
  ],
};

describe("traceRows", () => {
  it("marks exactly the fired branch", () => {
    const rows = traceRows(TRACE);
    expect(rows.map((r) => r.fired)).toEqual([false, true]);
    expect(rows[1]?.result).toBe("Halt");
  });

  it("shows evaluated lhs against threshold per literal", () => {
    const rows = traceRows(TRACE);
    expect(rows[1]?.literals[0]?.text).toBe("norm(p_h) = 2.13  <  3.00");
    expect(rows[1]?.literals[0]?.holds).toBe(true);
    expect(rows[0]?.literals[0]?.holds).toBe(false);
  });

  it("passes string operands through untouched", () => {
    const rows = traceRows(TRACE);
    expect(rows[1]?.literals[1]?.text).toBe("start = GoAlone  ==  GoAlone");
    expect(rows[1]?.literals[1]?.param).toBeNull();
  });

  it("handles the no-policy case", () => {
    expect(traceRows(null)).toEqual([]);
  });
});

describe("traceSummary", () => {
  it("names the fired branch", () => {
    expect(traceSummary(TRACE)).toBe("Halt (branch 2 fired)");
  });

  it("explains fall-through", () => {
    expect(traceSummary({ ...TRACE, fired: null })).toBe("no branch fired, keeping GoAlone");
  });

  it("handles missing trace", () => {
    expect(traceSummary(null)).toBe("no policy loaded");
  });
});

describe("fmtVal", () => {
  it("keeps integers short and bounds decimals", () => {
    expect(fmtVal(3)).toBe("3");
    expect(fmtVal(2.456)).toBe("2.46");
    expect(fmtVal(0.1234)).toBe("0.123");
    expect(fmtVal(12345.6)).toBe("1.23e+4");
    expect(fmtVal(0.0001)).toBe("1.00e-4");
    expect(fmtVal("Halt")).toBe("Halt");
  });
});
