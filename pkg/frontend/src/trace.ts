/** Decision-trace formatting: the "why did it do that" panel. Each branch of
 * the loaded policy becomes a row block showing every literal's evaluated
 * left side next to its threshold, plus which branch actually fired. */
import type { Trace } from "./protocol.js";

export interface LiteralRow {
  text: string;
  holds: boolean;
  /** Parameter name when the threshold is a learned value, for tooltips. */
  param: string | null;
}

export interface BranchRow {
  result: string;
  fired: boolean;
  literals: LiteralRow[];
}

export function fmtVal(v: number | string): string {
  if (typeof v === "string") return v;
  if (Number.isInteger(v)) return String(v);
  const a = Math.abs(v);
  if (a !== 0 && (a >= 1000 || a < 0.01)) return v.toExponential(2);
  return v.toFixed(a < 1 ? 3 : 2);
}

export function traceRows(trace: Trace | null): BranchRow[] {
  if (!trace) return [];
  return trace.branches.map((b, i) => ({
    result: b.result,
    fired: trace.fired === i,
    literals: b.literals.map((l) => ({
      text: `${l.lhs_text} = ${fmtVal(l.lhs)}  ${l.op}  ${fmtVal(l.threshold)}`,
      holds: l.holds,
      param: l.param,
    })),
  }));
}

/** One-line summary for the status bar, e.g. "Follow (branch 2 fired)" or
 * "no branch fired, keeping GoAlone". */
export function traceSummary(trace: Trace | null): string {
  if (!trace) return "no policy loaded";
  if (trace.fired === null) return `no branch fired, keeping ${trace.prev}`;
  const b = trace.branches[trace.fired];
  return b ? `${b.result} (branch ${trace.fired + 1} fired)` : "trace out of range";
}
