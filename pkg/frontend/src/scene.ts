/** Turns (scenario, latest frame) into a flat display list plus a legend.
 * Pure data in, pure data out: the canvas code just replays shapes, and the
 * tests can assert on scenes without a DOM. Every shape's position comes from
 * the server's own numbers. */
import { actionColor, DOOR_CLOSED, DOOR_OPEN, GOAL, HUMAN, VELOCITY, WALL } from "./colors.js";
import type { Scenario, Snapshot, Vec2 } from "./protocol.js";

export type Shape =
  | { kind: "segment"; a: Vec2; b: Vec2; color: string; width: number; role: string }
  | { kind: "circle"; c: Vec2; r: number; color: string; fill: boolean; role: string }
  | { kind: "arrow"; from: Vec2; to: Vec2; color: string; role: string }
  | { kind: "cross"; c: Vec2; r: number; color: string; role: string };

export interface LegendEntry {
  action: string;
  color: string;
}

export interface Scene {
  shapes: Shape[];
  legend: LegendEntry[];
  /** World-space bounding box [minx, miny, maxx, maxy] for the view fit. */
  bounds: [number, number, number, number];
}

const AGENT_R = 0.3;

export function buildScene(scn: Scenario, frame: Snapshot | null, actions: string[]): Scene {
  const shapes: Shape[] = [];

  for (const [x1, y1, x2, y2] of scn.walls) {
    shapes.push({ kind: "segment", a: [x1, y1], b: [x2, y2], color: WALL, width: 3, role: "wall" });
  }

  if (scn.door) {
    const open = frame ? frame.door_open : scn.door.initially_open;
    const [x1, y1, x2, y2] = scn.door.segment;
    shapes.push({
      kind: "segment",
      a: [x1, y1],
      b: [x2, y2],
      color: open ? DOOR_OPEN : DOOR_CLOSED,
      width: open ? 2 : 5,
      role: "door",
    });
  }

  if (scn.robot) {
    shapes.push({ kind: "cross", c: scn.robot.goal, r: 0.25, color: GOAL, role: "goal" });
  }

  if (frame) {
    for (const h of frame.humans) {
      shapes.push({ kind: "circle", c: h.pos, r: AGENT_R, color: HUMAN, fill: true, role: "human" });
      const tip: Vec2 = [h.pos[0] + h.vel[0], h.pos[1] + h.vel[1]];
      shapes.push({ kind: "arrow", from: h.pos, to: tip, color: VELOCITY, role: "human-vel" });
    }
    const color = actionColor(frame.action);
    const { pos, heading } = frame.robot;
    shapes.push({ kind: "circle", c: pos, r: AGENT_R, color, fill: true, role: "robot" });
    const tip: Vec2 = [pos[0] + Math.cos(heading) * 0.6, pos[1] + Math.sin(heading) * 0.6];
    shapes.push({ kind: "arrow", from: pos, to: tip, color, role: "robot-heading" });
  }

  return { shapes, legend: actions.map((a) => ({ action: a, color: actionColor(a) })), bounds: bounds(scn, frame) };
}

function bounds(scn: Scenario, frame: Snapshot | null): [number, number, number, number] {
  let minx = Infinity, miny = Infinity, maxx = -Infinity, maxy = -Infinity;
  const eat = (x: number, y: number) => {
    if (x < minx) minx = x;
    if (y < miny) miny = y;
    if (x > maxx) maxx = x;
    if (y > maxy) maxy = y;
  };
  for (const [x1, y1, x2, y2] of scn.walls) {
    eat(x1, y1);
    eat(x2, y2);
  }
  if (scn.robot) {
    eat(...scn.robot.start);
    eat(...scn.robot.goal);
  }
  if (frame) {
    eat(...frame.robot.pos);
    for (const h of frame.humans) eat(...h.pos);
  }
  if (!Number.isFinite(minx)) return [0, 0, 1, 1];
  // breathing room so agents at the extremes are not clipped
  return [minx - 1, miny - 1, maxx + 1, maxy + 1];
}
