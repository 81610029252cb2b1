"""Scenario descriptions for the crowd simulator, with JSON round-trip.

A scenario is pure data: static wall segments, an optional door, the
robot's route, human start/goal/speed rows, and the run controls (seed,
tick length, tick limit).  Everything downstream is deterministic given
one of these.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

from ..errors import SchemaError


def _finite_pair(v, what: str) -> tuple:
    x, y = v
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"{what} must be finite, got {v!r}")
    return (float(x), float(y))


def _finite_seg(s, what: str) -> tuple:
    x1, y1, x2, y2 = s
    vals = tuple(float(c) for c in (x1, y1, x2, y2))
    if not all(math.isfinite(c) for c in vals):
        raise ValueError(f"{what} must be finite, got {s!r}")
    return vals


@dataclass(frozen=True)
class Door:
    """A wall segment that disappears once opened.

    The door opens (and stays open) after some agent has waited inside
    trigger_radius of its midpoint for open_delay consecutive seconds;
    "waiting" means commanded speed below 0.1 m/s.
    """

    segment: tuple  # (x1, y1, x2, y2)
    open_delay: float = 5.0
    trigger_radius: float = 1.5
    initially_open: bool = False

    def __post_init__(self):
        object.__setattr__(self, "segment", _finite_seg(self.segment, "door segment"))
        if not (self.open_delay >= 0.0 and math.isfinite(self.open_delay)):
            raise ValueError("door open_delay must be finite and >= 0")
        if not (self.trigger_radius > 0.0 and math.isfinite(self.trigger_radius)):
            raise ValueError("door trigger_radius must be finite and > 0")

    @property
    def midpoint(self) -> tuple:
        x1, y1, x2, y2 = self.segment
        return ((x1 + x2) / 2.0, (y1 + y2) / 2.0)


@dataclass(frozen=True)
class HumanSpec:
    start: tuple
    goal: tuple
    speed: float  # desired walking speed, m/s

    def __post_init__(self):
        object.__setattr__(self, "start", _finite_pair(self.start, "human start"))
        object.__setattr__(self, "goal", _finite_pair(self.goal, "human goal"))
        if not (math.isfinite(self.speed) and self.speed >= 0.0):
            raise ValueError("human speed must be finite and >= 0")


@dataclass(frozen=True)
class Scenario:
    name: str
    walls: tuple = ()
    door: Door | None = None
    robot_start: tuple = (0.0, 0.0)
    robot_goal: tuple = (10.0, 0.0)
    waypoints: tuple = ()
    humans: tuple = ()
    seed: int = 0
    dt: float = 0.05
    max_ticks: int = 2400
    goal_radius: float = 0.5

    def __post_init__(self):
        object.__setattr__(
            self, "walls", tuple(_finite_seg(s, "wall") for s in self.walls)
        )
        object.__setattr__(self, "robot_start", _finite_pair(self.robot_start, "robot start"))
        object.__setattr__(self, "robot_goal", _finite_pair(self.robot_goal, "robot goal"))
        object.__setattr__(
            self, "waypoints", tuple(_finite_pair(w, "waypoint") for w in self.waypoints)
        )
        object.__setattr__(self, "humans", tuple(self.humans))
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError("dt must be finite and > 0")
        if self.max_ticks <= 0:
            raise ValueError("max_ticks must be > 0")
        if not (self.goal_radius > 0.0 and math.isfinite(self.goal_radius)):
            raise ValueError("goal_radius must be finite and > 0")

    def route(self) -> tuple:
        """Waypoints to steer through, always ending at the goal."""
        if self.waypoints and self.waypoints[-1] == self.robot_goal:
            return self.waypoints
        return self.waypoints + (self.robot_goal,)

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=seed)


# --- JSON -----------------------------------------------------------------


def scenario_to_json(s: Scenario) -> dict:
    obj = {
        "v": 1,
        "name": s.name,
        "walls": [list(w) for w in s.walls],
        "robot": {
            "start": list(s.robot_start),
            "goal": list(s.robot_goal),
            "waypoints": [list(w) for w in s.waypoints],
        },
        "humans": [
            {"start": list(h.start), "goal": list(h.goal), "speed": h.speed}
            for h in s.humans
        ],
        "seed": s.seed,
        "dt": s.dt,
        "max_ticks": s.max_ticks,
        "goal_radius": s.goal_radius,
    }
    if s.door is not None:
        obj["door"] = {
            "segment": list(s.door.segment),
            "open_delay": s.door.open_delay,
            "trigger_radius": s.door.trigger_radius,
            "initially_open": s.door.initially_open,
        }
    return obj


def scenario_from_json(obj: dict) -> Scenario:
    if not isinstance(obj, dict):
        raise SchemaError("scenario must be a JSON object")
    if obj.get("v") != 1:
        raise SchemaError(f"unsupported scenario version {obj.get('v')!r}")
    for key in ("name", "robot"):
        if key not in obj:
            raise SchemaError(f"scenario missing {key!r}")
    robot = obj["robot"]
    for key in ("start", "goal"):
        if key not in robot:
            raise SchemaError(f"scenario robot missing {key!r}")
    door = None
    if "door" in obj:
        d = obj["door"]
        if "segment" not in d:
            raise SchemaError("scenario door missing 'segment'")
        door = Door(
            tuple(d["segment"]),
            open_delay=float(d.get("open_delay", 5.0)),
            trigger_radius=float(d.get("trigger_radius", 1.5)),
            initially_open=bool(d.get("initially_open", False)),
        )
    try:
        return Scenario(
            name=str(obj["name"]),
            walls=tuple(tuple(w) for w in obj.get("walls", [])),
            door=door,
            robot_start=tuple(robot["start"]),
            robot_goal=tuple(robot["goal"]),
            waypoints=tuple(tuple(w) for w in robot.get("waypoints", [])),
            humans=tuple(
                HumanSpec(tuple(h["start"]), tuple(h["goal"]), float(h["speed"]))
                for h in obj.get("humans", [])
            ),
            seed=int(obj.get("seed", 0)),
            dt=float(obj.get("dt", 0.05)),
            max_ticks=int(obj.get("max_ticks", 2400)),
            goal_radius=float(obj.get("goal_radius", 0.5)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad scenario: {e}") from None


def save_scenario(s: Scenario, path) -> None:
    with open(path, "w") as f:
        json.dump(scenario_to_json(s), f, indent=2, sort_keys=True)
        f.write("\n")


def load_scenario(path) -> Scenario:
    with open(path) as f:
        return scenario_from_json(json.load(f))
