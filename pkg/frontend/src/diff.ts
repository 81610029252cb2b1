/** Before/after policy comparison for the repair review panel. Line-level
 * alignment first, then a token-level pass inside changed line pairs so an
 * inserted disjunct or conjunct lights up inside an otherwise familiar
 * branch instead of repainting the whole line. */

export interface Span {
  text: string;
  changed: boolean;
}

export type DiffLine =
  | { kind: "same"; text: string }
  | { kind: "added"; text: string; spans: Span[] }
  | { kind: "removed"; text: string }
  | { kind: "changed"; before: Span[]; after: Span[] };

/** Policy-aware tokenizer: identifiers with dots, numbers, the two boolean
 * connectives, comparison and arithmetic operators, brackets. Whitespace is
 * folded into the following token's rendering but not compared. */
export function tokenize(line: string): string[] {
  const re = /[A-Za-z_][A-Za-z0-9_.]*|\d+\.?\d*(?:[eE][-+]?\d+)?|&&|\|\||==|[-+*/<>():=\[\],?]|\S/g;
  return line.match(re) ?? [];
}

function lcsTable<T>(a: T[], b: T[], eq: (x: T, y: T) => boolean): number[][] {
  const n = a.length, m = b.length;
  const dp: number[][] = Array.from({ length: n + 1 }, () => new Array(m + 1).fill(0));
  for (let i = n - 1; i >= 0; i--) {
    for (let j = m - 1; j >= 0; j--) {
      dp[i]![j] = eq(a[i]!, b[j]!) ? dp[i + 1]![j + 1]! + 1 : Math.max(dp[i + 1]![j]!, dp[i]![j + 1]!);
    }
  }
  return dp;
}

/** Aligned pairs [i, j] of matching elements, in order. */
function lcsPairs<T>(a: T[], b: T[], eq: (x: T, y: T) => boolean): Array<[number, number]> {
  const dp = lcsTable(a, b, eq);
  const pairs: Array<[number, number]> = [];
  let i = 0, j = 0;
  while (i < a.length && j < b.length) {
    if (eq(a[i]!, b[j]!)) {
      pairs.push([i, j]);
      i++;
      j++;
    } else if (dp[i + 1]![j]! >= dp[i]![j + 1]!) {
      i++;
    } else {
      j++;
    }
  }
  return pairs;
}

function tokenSpans(tokens: string[], keep: Set<number>): Span[] {
  return tokens.map((t, i) => ({ text: t, changed: !keep.has(i) }));
}

/** Token-level diff of one line pair: spans with insertions/removals marked. */
export function diffLinePair(before: string, after: string): { before: Span[]; after: Span[] } {
  const ta = tokenize(before);
  const tb = tokenize(after);
  const pairs = lcsPairs(ta, tb, (x, y) => x === y);
  const keepA = new Set(pairs.map(([i]) => i));
  const keepB = new Set(pairs.map(([, j]) => j));
  return { before: tokenSpans(ta, keepA), after: tokenSpans(tb, keepB) };
}

export function diffPolicies(before: string, after: string): DiffLine[] {
  const la = before.split("\n").filter((l) => l.length > 0);
  const lb = after.split("\n").filter((l) => l.length > 0);
  const pairs = lcsPairs(la, lb, (x, y) => x === y);
  const out: DiffLine[] = [];
  let i = 0, j = 0;
  const flushGap = (endA: number, endB: number) => {
    // pair up removed/added runs positionally; leftovers stay one-sided
    const removed = la.slice(i, endA);
    const added = lb.slice(j, endB);
    const n = Math.min(removed.length, added.length);
    for (let k = 0; k < n; k++) {
      const spans = diffLinePair(removed[k]!, added[k]!);
      out.push({ kind: "changed", before: spans.before, after: spans.after });
    }
    for (let k = n; k < removed.length; k++) out.push({ kind: "removed", text: removed[k]! });
    for (let k = n; k < added.length; k++) {
      const text = added[k]!;
      out.push({ kind: "added", text, spans: tokenize(text).map((t) => ({ text: t, changed: true })) });
    }
  };
  for (const [pi, pj] of pairs) {
    flushGap(pi, pj);
    out.push({ kind: "same", text: la[pi]! });
    i = pi + 1;
    j = pj + 1;
  }
  flushGap(la.length, lb.length);
  return out;
}

/** Render spans back to text with single spaces, for tests and tooltips. */
export function spanText(spans: Span[], onlyChanged = false): string {
  return spans
    .filter((s) => !onlyChanged || s.changed)
    .map((s) => s.text)
    .join(" ");
}
