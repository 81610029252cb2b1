/** Studio entry point: wires the socket, the timeline, the canvas, and the
 * panels together. All state shown anywhere on the page originates from
 * server messages; this file only routes and schedules. */
import { StudioClient } from "./client.js";
import { actionColor } from "./colors.js";
import { DiffLine, Span, diffPolicies } from "./diff.js";
import { drawScene } from "./draw.js";
import { Hello, RepairReport, Scenario, Snapshot, msg } from "./protocol.js";
import { buildScene } from "./scene.js";
import { Timeline } from "./timeline.js";
import { traceRows, traceSummary } from "./trace.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id} in index.html`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("scene");
const scrubber = el<HTMLInputElement>("scrubber");
const tickReadout = el<HTMLSpanElement>("tick-readout");
const modeBadge = el<HTMLSpanElement>("mode-badge");
const connBadge = el<HTMLSpanElement>("conn-badge");
const demoCounter = el<HTMLSpanElement>("demo-counter");
const actionBar = el<HTMLDivElement>("action-bar");
const legendBar = el<HTMLDivElement>("legend");
const timelineBar = el<HTMLCanvasElement>("timeline-bar");
const tracePanel = el<HTMLDivElement>("trace-panel");
const traceLine = el<HTMLSpanElement>("trace-summary");
const policyPanel = el<HTMLDivElement>("policy-panel");
const reportPanel = el<HTMLDivElement>("report-panel");
const banner = el<HTMLDivElement>("banner");
const pauseBtn = el<HTMLButtonElement>("btn-pause");
const resumeBtn = el<HTMLButtonElement>("btn-resume");
const liveBtn = el<HTMLButtonElement>("btn-live");
const runBtn = el<HTMLButtonElement>("btn-run");
const saveBtn = el<HTMLButtonElement>("btn-save");
const savePath = el<HTMLInputElement>("save-path");

const timeline = new Timeline(2000);
let scn: Scenario | null = null;
let actions: string[] = [];
let mode: "running" | "paused" | "rewound" = "running";
let policyBefore: string | null = null;
let policyAfter: string | null = null;
let lastReport: RepairReport | null = null;

function showBanner(text: string, kind: "error" | "info" = "error"): void {
  banner.textContent = text;
  banner.className = `banner ${kind}`;
  banner.hidden = false;
  window.setTimeout(() => (banner.hidden = true), 6000);
}

const client = new StudioClient(`ws://${location.host}/ws`, {
  hello: onHello,
  mode: (m) => {
    mode = m;
    modeBadge.textContent = m;
    modeBadge.dataset.mode = m;
  },
  demos: (list) => {
    demoCounter.textContent = String(list.length);
  },
  saved: (path, count) => showBanner(`saved ${count} demos to ${path}`, "info"),
  report: (r) => {
    lastReport = r;
    renderReport();
  },
  policy: (text) => {
    if (policyBefore !== null && text !== null && text !== policyBefore) {
      policyAfter = text;
    } else {
      policyBefore = text;
      policyAfter = null;
    }
    renderPolicy();
  },
  serverError: (code, message) => showBanner(`${code}: ${message}`),
  protocolError: (e) => showBanner(`protocol: ${e.message}`),
  conn: (state) => {
    timeline.conn = state;
    connBadge.textContent = state;
    connBadge.dataset.state = state;
  },
});

function onHello(h: Hello): void {
  scn = h.scenario;
  actions = h.actions;
  policyBefore = h.policy;
  policyAfter = null;
  actionBar.replaceChildren(
    ...actions.map((a) => {
      const b = document.createElement("button");
      b.textContent = `label ${a}`;
      b.style.borderColor = actionColor(a);
      b.onclick = () => labelAtCursor(a);
      return b;
    }),
  );
  legendBar.replaceChildren(
    ...actions.map((a) => {
      const s = document.createElement("span");
      s.className = "legend-entry";
      const dot = document.createElement("i");
      dot.style.background = actionColor(a);
      s.append(dot, a);
      return s;
    }),
  );
  renderPolicy();
}

/** The labeling gesture: the cursor marks where the user wants the different
 * action, so rewind there first and then attach the label. Both messages ride
 * the validated encoders. */
function labelAtCursor(action: string): void {
  if (!timeline.cursorBuffered()) {
    showBanner("cursor is outside the buffered window, cannot rewind there");
    return;
  }
  const n = timeline.rewindSteps();
  if (mode === "running") client.send(msg.pause());
  if (n > 0) client.send(msg.rewind(n));
  client.send(msg.labelTransition(action));
  timeline.addLabel(timeline.cursor, action);
}

pauseBtn.onclick = () => client.send(msg.pause());
resumeBtn.onclick = () => {
  timeline.follow();
  client.send(msg.resume());
};
liveBtn.onclick = () => {
  timeline.follow();
  syncScrubber();
};
runBtn.onclick = () => {
  reportPanel.textContent = "running...";
  client.send(msg.runIdips());
};
saveBtn.onclick = () => {
  const path = savePath.value.trim();
  if (!path) {
    showBanner("enter a file name first");
    return;
  }
  client.send(msg.saveDemos(path));
};

scrubber.oninput = () => {
  timeline.seek(Number(scrubber.value));
  if (mode === "running") client.send(msg.pause());
  renderAll();
};

function syncScrubber(): void {
  scrubber.min = String(timeline.oldestTick);
  scrubber.max = String(timeline.newestTick);
  if (timeline.following) scrubber.value = String(timeline.cursor);
  tickReadout.textContent = `t=${timeline.cursor}/${timeline.newestTick}`;
}

// --- panels ---

function renderTrace(frame: Snapshot | null): void {
  const trace = frame?.trace ?? null;
  traceLine.textContent = traceSummary(trace);
  tracePanel.replaceChildren(
    ...traceRows(trace).map((row) => {
      const div = document.createElement("div");
      div.className = row.fired ? "branch fired" : "branch";
      const head = document.createElement("div");
      head.className = "branch-head";
      head.textContent = `-> ${row.result}`;
      head.style.color = actionColor(row.result);
      div.append(head);
      for (const lit of row.literals) {
        const line = document.createElement("div");
        line.className = lit.holds ? "lit holds" : "lit";
        line.textContent = lit.text;
        if (lit.param) line.title = `learned parameter ${lit.param}`;
        div.append(line);
      }
      return div;
    }),
  );
}

function spanNodes(spans: Span[]): Node[] {
  return spans.map((s) => {
    const node = document.createElement("span");
    node.textContent = s.text + " ";
    if (s.changed) node.className = "tok-changed";
    return node;
  });
}

function diffNodes(lines: DiffLine[]): Node[] {
  return lines.map((l) => {
    const div = document.createElement("div");
    div.className = `diff-line ${l.kind}`;
    switch (l.kind) {
      case "same":
        div.textContent = l.text;
        break;
      case "removed":
        div.textContent = l.text;
        break;
      case "added":
        div.append(...spanNodes(l.spans));
        break;
      case "changed":
        div.append(...spanNodes(l.after));
        break;
    }
    return div;
  });
}

function renderPolicy(): void {
  if (policyBefore === null && policyAfter === null) {
    policyPanel.textContent = "no policy loaded";
    return;
  }
  if (policyAfter === null) {
    policyPanel.replaceChildren(
      ...(policyBefore ?? "").split("\n").filter(Boolean).map((line) => {
        const div = document.createElement("div");
        div.className = "diff-line same";
        div.textContent = line;
        return div;
      }),
    );
    return;
  }
  policyPanel.replaceChildren(...diffNodes(diffPolicies(policyBefore ?? "", policyAfter)));
}

function renderReport(): void {
  if (!lastReport) return;
  const r = lastReport;
  const head = document.createElement("div");
  head.textContent = `score ${r.policy_score_before.toFixed(3)} -> ${r.policy_score_after.toFixed(3)}`;
  const rows = r.entries.map((e) => {
    const div = document.createElement("div");
    div.className = "report-entry";
    div.textContent = `${e.transition.join(" -> ")} [${e.stage}] ${e.before_score.toFixed(2)} -> ${e.after_score.toFixed(2)}`;
    div.title = e.diff;
    return div;
  });
  reportPanel.replaceChildren(head, ...rows);
}

// --- timeline bar ---

function renderTimelineBar(): void {
  const ctx = timelineBar.getContext("2d");
  if (!ctx) return;
  const w = timelineBar.width, h = timelineBar.height;
  ctx.clearRect(0, 0, w, h);
  const lo = timeline.oldestTick, hi = timeline.newestTick;
  const span = Math.max(1, hi - lo);
  const X = (t: number) => ((t - lo) / span) * w;
  for (const seg of timeline.segments()) {
    ctx.fillStyle = actionColor(seg.action);
    ctx.fillRect(X(seg.from), 0, Math.max(1, X(seg.to + 1) - X(seg.from)), h - 6);
  }
  for (const lab of timeline.labels) {
    if (lab.tick < lo || lab.tick > hi) continue;
    ctx.fillStyle = actionColor(lab.action);
    ctx.beginPath();
    ctx.moveTo(X(lab.tick) - 4, h);
    ctx.lineTo(X(lab.tick) + 4, h);
    ctx.lineTo(X(lab.tick), h - 6);
    ctx.closePath();
    ctx.fill();
  }
  ctx.fillStyle = "#111";
  ctx.fillRect(X(timeline.cursor) - 1, 0, 2, h);
}

// --- frame loop ---

function renderAll(): void {
  if (scn) {
    const frame = timeline.following ? timeline.newest() : timeline.frameAtCursor();
    const scene = buildScene(scn, frame ?? null, actions);
    const ctx = canvas.getContext("2d");
    if (ctx) drawScene(ctx, scene, canvas.width, canvas.height);
    renderTrace(frame ?? null);
  }
  syncScrubber();
  renderTimelineBar();
}

function pump(): void {
  const latest = client.frames.drainLatest();
  if (latest) timeline.push(latest);
  renderAll();
  requestAnimationFrame(pump);
}

requestAnimationFrame(pump);
