/** Wire protocol, v1. Mirrors the server's committed JSON schema; every
 * outbound message is built by an encoder here and every inbound byte goes
 * through parseServer, so nothing unvalidated crosses the socket in either
 * direction. */
import { z } from "zod";

export const vec2 = z.tuple([z.number(), z.number()]);
export type Vec2 = z.infer<typeof vec2>;

const agent = z
  .object({ pos: vec2, vel: vec2 })
  .strict();

const literal = z
  .object({
    lhs_text: z.string(),
    lhs: z.union([z.number(), z.string()]),
    op: z.enum([">", "<", "=="]),
    param: z.string().nullable(),
    threshold: z.union([z.number(), z.string()]),
    holds: z.boolean(),
  })
  .strict();
export type Literal = z.infer<typeof literal>;

const trace = z
  .object({
    prev: z.string(),
    fired: z.number().int().nullable(),
    branches: z.array(
      z.object({ result: z.string(), literals: z.array(literal) }).strict(),
    ),
  })
  .strict();
export type Trace = z.infer<typeof trace>;

// The server's hello carries the full scenario document. The renderer only
// needs the geometry; everything else passes through untouched.
const door = z
  .object({
    segment: z.tuple([z.number(), z.number(), z.number(), z.number()]),
    open_delay: z.number(),
    trigger_radius: z.number(),
    initially_open: z.boolean(),
  })
  .passthrough();

export const scenario = z
  .object({
    name: z.string().default("unnamed"),
    walls: z.array(z.tuple([z.number(), z.number(), z.number(), z.number()])).default([]),
    robot: z
      .object({ start: vec2, goal: vec2, waypoints: z.array(vec2).default([]) })
      .passthrough()
      .optional(),
    door: door.optional(),
    dt: z.number().optional(),
  })
  .passthrough();
export type Scenario = z.infer<typeof scenario>;

const hello = z
  .object({
    v: z.literal(1),
    type: z.literal("hello"),
    scenario,
    actions: z.array(z.string()),
    policy: z.string().nullable(),
    step_rate: z.number(),
  })
  .strict();

export const snapshot = z
  .object({
    v: z.literal(1),
    type: z.literal("snapshot"),
    tick: z.number().int().nonnegative(),
    mode: z.enum(["running", "paused", "rewound"]),
    robot: z.object({ pos: vec2, vel: vec2, heading: z.number() }).strict(),
    humans: z.array(agent),
    door_open: z.boolean(),
    action: z.string(),
    trace: trace.nullable(),
  })
  .strict();
export type Snapshot = z.infer<typeof snapshot>;

const mode = z
  .object({ v: z.literal(1), type: z.literal("mode"), mode: z.enum(["running", "paused", "rewound"]) })
  .strict();

const demos = z
  .object({ v: z.literal(1), type: z.literal("demos"), demos: z.array(z.record(z.unknown())) })
  .strict();

const saved = z
  .object({ v: z.literal(1), type: z.literal("saved"), path: z.string(), count: z.number().int().nonnegative() })
  .strict();

const repairEntry = z
  .object({
    transition: z.array(z.string()),
    stage: z.string(),
    before_score: z.number(),
    after_score: z.number(),
    diff: z.string(),
  })
  .passthrough();

export const repairReport = z
  .object({
    policy_score_before: z.number(),
    policy_score_after: z.number(),
    entries: z.array(repairEntry).default([]),
  })
  .passthrough();
export type RepairReport = z.infer<typeof repairReport>;

const report = z
  .object({ v: z.literal(1), type: z.literal("report"), report: repairReport })
  .strict();

const policy = z
  .object({ v: z.literal(1), type: z.literal("policy"), text: z.string().nullable() })
  .strict();

const serverError = z
  .object({ v: z.literal(1), type: z.literal("error"), code: z.string(), message: z.string() })
  .strict();

export const serverMsg = z.discriminatedUnion("type", [
  hello,
  snapshot,
  mode,
  demos,
  saved,
  report,
  policy,
  serverError,
]);
export type ServerMsg = z.infer<typeof serverMsg>;
export type Hello = z.infer<typeof hello>;

export class ProtocolError extends Error {
  constructor(message: string, readonly raw: unknown) {
    super(message);
    this.name = "ProtocolError";
  }
}

export function parseServer(data: string): ServerMsg {
  let obj: unknown;
  try {
    obj = JSON.parse(data);
  } catch {
    throw new ProtocolError("not JSON", data);
  }
  const res = serverMsg.safeParse(obj);
  if (!res.success) {
    throw new ProtocolError(res.error.issues[0]?.message ?? "invalid message", obj);
  }
  return res.data;
}

// --- outbound ---

export type ClientMsg =
  | { v: 1; type: "pause" }
  | { v: 1; type: "resume" }
  | { v: 1; type: "rewind"; n: number }
  | { v: 1; type: "set_action"; action: string }
  | { v: 1; type: "label_transition"; action: string }
  | { v: 1; type: "save_demos"; path: string }
  | { v: 1; type: "run_idips"; min_score?: number }
  | { v: 1; type: "load_policy"; text: string }
  | { v: 1; type: "step_rate"; hz: number }
  | { v: 1; type: "step"; n?: number };

export const msg = {
  pause: (): ClientMsg => ({ v: 1, type: "pause" }),
  resume: (): ClientMsg => ({ v: 1, type: "resume" }),
  rewind: (n: number): ClientMsg => {
    if (!Number.isInteger(n) || n < 0) throw new ProtocolError(`bad rewind n=${n}`, n);
    return { v: 1, type: "rewind", n };
  },
  setAction: (action: string): ClientMsg => ({ v: 1, type: "set_action", action }),
  labelTransition: (action: string): ClientMsg => ({ v: 1, type: "label_transition", action }),
  saveDemos: (path: string): ClientMsg => {
    if (!path) throw new ProtocolError("empty save path", path);
    return { v: 1, type: "save_demos", path };
  },
  runIdips: (minScore?: number): ClientMsg =>
    minScore === undefined ? { v: 1, type: "run_idips" } : { v: 1, type: "run_idips", min_score: minScore },
  loadPolicy: (text: string): ClientMsg => ({ v: 1, type: "load_policy", text }),
  stepRate: (hz: number): ClientMsg => {
    if (!(hz > 0)) throw new ProtocolError(`bad step rate ${hz}`, hz);
    return { v: 1, type: "step_rate", hz };
  },
  step: (n?: number): ClientMsg => {
    if (n === undefined) return { v: 1, type: "step" };
    if (!Number.isInteger(n) || n < 1) throw new ProtocolError(`bad step n=${n}`, n);
    return { v: 1, type: "step", n };
  },
};

export function encode(m: ClientMsg): string {
  return JSON.stringify(m);
}
