import { describe, expect, it } from "vitest";
import { actionColor } from "../src/colors.js";
import type { Scenario, Snapshot } from "../src/protocol.js";
import { buildScene } from "../src/scene.js";

const CORRIDOR: Scenario = {
  name: "corridor-0",
  walls: [
    [0, -2, 12, -2],
    [0, 2, 12, 2],
  ],
  robot: { start: [0.5, 0], goal: [11.5, 0], waypoints: [] },
};

const DOOR: Scenario = {
  ...CORRIDOR,
  name: "door-0",
  door: { segment: [6, -0.7, 6, 0.7], open_delay: 5, trigger_radius: 1.5, initially_open: false },
};

function frame(overrides: Partial<Snapshot> = {}): Snapshot {
  return {
    v: 1,
    type: "snapshot",
    tick: 3,
    mode: "running",
    robot: { pos: [2, 0], vel: [1, 0], heading: 0.5 },
    humans: [{ pos: [5, 1], vel: [-0.6, 0.1] }],
    door_open: false,
    action: "Pass",
    trace: null,
    ...overrides,
  };
}

describe("buildScene", () => {
  it("renders walls only for a scenario with no frame yet", () => {
    const scene = buildScene({ name: "empty", walls: CORRIDOR.walls }, null, []);
    expect(scene.shapes.every((s) => s.role === "wall")).toBe(true);
    expect(scene.shapes).toHaveLength(2);
  });

  it("colors the door by its state", () => {
    const closed = buildScene(DOOR, frame({ door_open: false }), []);
    const open = buildScene(DOOR, frame({ door_open: true }), []);
    const closedDoor = closed.shapes.find((s) => s.role === "door");
    const openDoor = open.shapes.find((s) => s.role === "door");
    expect(closedDoor).toBeDefined();
    expect(openDoor).toBeDefined();
    expect(closedDoor?.color).not.toBe(openDoor?.color);
  });

  it("falls back to the scenario's initial door state without a frame", () => {
    const scene = buildScene(DOOR, null, []);
    const door = scene.shapes.find((s) => s.role === "door");
    const withClosedFrame = buildScene(DOOR, frame({ door_open: false }), []);
    expect(door?.color).toBe(withClosedFrame.shapes.find((s) => s.role === "door")?.color);
  });

  it("draws the robot in its action color with a heading arrow", () => {
    const scene = buildScene(CORRIDOR, frame({ action: "Halt" }), ["Halt"]);
    const body = scene.shapes.find((s) => s.role === "robot");
    const arrow = scene.shapes.find((s) => s.role === "robot-heading");
    expect(body?.color).toBe(actionColor("Halt"));
    expect(arrow?.color).toBe(actionColor("Halt"));
    expect(arrow?.kind).toBe("arrow");
  });

  it("gives each human a velocity vector", () => {
    const f = frame({
      humans: [
        { pos: [5, 1], vel: [-0.6, 0.1] },
        { pos: [7, -1], vel: [0.4, 0] },
      ],
    });
    const scene = buildScene(CORRIDOR, f, []);
    expect(scene.shapes.filter((s) => s.role === "human")).toHaveLength(2);
    const vels = scene.shapes.filter((s) => s.role === "human-vel");
    expect(vels).toHaveLength(2);
    const first = vels[0];
    if (first?.kind !== "arrow") throw new Error("expected arrow");
    expect(first.to[0]).toBeCloseTo(5 - 0.6);
    expect(first.to[1]).toBeCloseTo(1 + 0.1);
  });

  it("legend covers the session's actions with their colors", () => {
    const scene = buildScene(CORRIDOR, null, ["GoAlone", "Halt"]);
    expect(scene.legend).toEqual([
      { action: "GoAlone", color: actionColor("GoAlone") },
      { action: "Halt", color: actionColor("Halt") },
    ]);
  });

  it("bounds cover walls and agents with margin", () => {
    const scene = buildScene(CORRIDOR, frame(), []);
    const [minx, miny, maxx, maxy] = scene.bounds;
    expect(minx).toBeLessThanOrEqual(0);
    expect(maxx).toBeGreaterThanOrEqual(12);
    expect(miny).toBeLessThanOrEqual(-2);
    expect(maxy).toBeGreaterThanOrEqual(2);
  });

  it("degenerate empty scenario still yields usable bounds", () => {
    const scene = buildScene({ name: "void", walls: [] }, null, []);
    const [minx, miny, maxx, maxy] = scene.bounds;
    expect(maxx).toBeGreaterThan(minx);
    expect(maxy).toBeGreaterThan(miny);
  });
});

describe("actionColor", () => {
  it("is stable and distinct for the builtin actions", () => {
    const names = ["GoAlone", "Follow", "Pass", "Halt"];
    const colors = names.map(actionColor);
    expect(new Set(colors).size).toBe(4);
    expect(names.map(actionColor)).toEqual(colors);
  });

  it("hashes unknown actions to some color", () => {
    expect(actionColor("Wiggle")).toMatch(/^hsl\(/);
    expect(actionColor("Wiggle")).toBe(actionColor("Wiggle"));
  });
});
