"""Simulation core: snapshots, the tick function, and sensor extraction.

step() is a pure function of (snapshot, action, scenario): humans follow
social-force dynamics, the robot follows the chosen action primitive with
an acceleration limit, and a closed door opens after an agent has waited
at it long enough.  Restarting from any stored snapshot therefore replays
the original run exactly.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..evaluator import Obstacles, WorldState
from .kernels import (
    AGENT_RADIUS,
    METRIC_CUTOFF,
    ROBOT_CLEARANCE,
    SFM_A,
    SFM_B,
    SFM_TAU,
    human_accels,
    metrics_tick,
)
from .scenario import Scenario

V_MAX = 1.0  # robot cruise speed, m/s
A_MAX = 2.0  # robot acceleration limit, m/s^2
WAYPOINT_RADIUS = 0.8
PASS_OFFSET = 0.75
PASS_SPEED_GAIN = 1.25
FOLLOW_GAP = 1.0
WAIT_SPEED = 0.1  # below this commanded speed an agent counts as waiting
HUMAN_SPEED_CAP = 1.3  # speed clamp as a multiple of desired speed
SENTINEL = (1000.0, 0.0)
FRONT_LIMIT = 999.0  # humans at/beyond the sentinel distance are "absent"


@dataclass(frozen=True)
class SimSnapshot:
    """Complete simulator state at one tick; replay starts anywhere."""

    tick: int
    robot_pos: tuple
    robot_vel: tuple
    robot_heading: float
    wp_index: int
    humans: tuple  # ((pos, vel), ...) world frame
    door_open: bool
    door_wait: float  # consecutive waiting seconds accumulated so far
    action: str  # action executed to reach this snapshot


def init_snapshot(scenario: Scenario, action: str = "GoAlone") -> SimSnapshot:
    route = scenario.route()
    hx = route[0][0] - scenario.robot_start[0]
    hy = route[0][1] - scenario.robot_start[1]
    heading = math.atan2(hy, hx) if (hx or hy) else 0.0
    return SimSnapshot(
        tick=0,
        robot_pos=scenario.robot_start,
        robot_vel=(0.0, 0.0),
        robot_heading=heading,
        wp_index=0,
        humans=tuple((h.start, (0.0, 0.0)) for h in scenario.humans),
        door_open=scenario.door.initially_open if scenario.door else True,
        door_wait=0.0,
        action=action,
    )


def _active_segments(scenario: Scenario, door_open: bool):
    segs = list(scenario.walls)
    if scenario.door is not None and not door_open:
        segs.append(scenario.door.segment)
    return segs


def _seg_array(segs) -> np.ndarray:
    if not segs:
        return np.zeros((0, 4))
    return np.array(segs, dtype=np.float64)


def _closest_on_segment(p, seg):
    x1, y1, x2, y2 = seg
    dx, dy = x2 - x1, y2 - y1
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return (x1, y1)
    t = ((p[0] - x1) * dx + (p[1] - y1) * dy) / L2
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return (x1 + t * dx, y1 + t * dy)


def _blocked(p, segs, radius) -> bool:
    for seg in segs:
        c = _closest_on_segment(p, seg)
        if math.hypot(p[0] - c[0], p[1] - c[1]) < radius:
            return True
    return False


def _move_clamped(p, v, dt, segs, radius):
    """Advance p by v*dt, dropping blocked axes so the agent slides along
    walls instead of tunneling; returns (new position, effective velocity)."""
    cand = (p[0] + v[0] * dt, p[1] + v[1] * dt)
    if not _blocked(cand, segs, radius):
        return cand, v
    cand_x = (p[0] + v[0] * dt, p[1])
    if not _blocked(cand_x, segs, radius):
        return cand_x, (v[0], 0.0)
    cand_y = (p[0], p[1] + v[1] * dt)
    if not _blocked(cand_y, segs, radius):
        return cand_y, (0.0, v[1])
    return p, (0.0, 0.0)


def _front_humans(snap: SimSnapshot):
    """Humans ahead of the robot in its frame: (distance, bearing, index,
    robot-frame position), nearest first."""
    c, s = math.cos(snap.robot_heading), math.sin(snap.robot_heading)
    out = []
    for i, (pos, _vel) in enumerate(snap.humans):
        dx = pos[0] - snap.robot_pos[0]
        dy = pos[1] - snap.robot_pos[1]
        rx = c * dx + s * dy
        ry = -s * dx + c * dy
        if rx <= 0.0:
            continue
        d = math.hypot(rx, ry)
        if d >= FRONT_LIMIT:
            continue
        out.append((d, math.atan2(ry, rx), i, (rx, ry)))
    out.sort(key=lambda t: (t[0], abs(t[1]), t[2]))
    return out


def _command_velocity(snap: SimSnapshot, action: str, scenario: Scenario) -> tuple:
    """The action primitive's desired robot velocity (pre-clamp)."""
    route = scenario.route()
    wp = route[min(snap.wp_index, len(route) - 1)]
    to_wp = (wp[0] - snap.robot_pos[0], wp[1] - snap.robot_pos[1])
    d_wp = math.hypot(*to_wp)
    aim = (to_wp[0] / d_wp, to_wp[1] / d_wp) if d_wp > 1e-9 else (0.0, 0.0)

    if action == "Halt":
        return (0.0, 0.0)
    if action == "GoAlone":
        speed = V_MAX
        if snap.wp_index >= len(route) - 1:
            speed = min(V_MAX, d_wp)  # park at the final goal, don't orbit it
        return (aim[0] * speed, aim[1] * speed)

    front = _front_humans(snap)
    if action == "Follow":
        if not front:
            return (0.0, 0.0)  # nobody to follow: wait
        d, _b, i, _rf = front[0]
        hpos, hvel = snap.humans[i]
        to_h = (hpos[0] - snap.robot_pos[0], hpos[1] - snap.robot_pos[1])
        dh = math.hypot(*to_h)
        if dh < 1e-9:
            return (0.0, 0.0)
        # match the leader's speed, closing or opening toward the gap
        speed = math.hypot(*hvel) + 0.5 * (dh - FOLLOW_GAP)
        speed = max(0.0, min(speed, V_MAX))
        return (to_h[0] / dh * speed, to_h[1] / dh * speed)
    if action == "Pass":
        speed = min(PASS_SPEED_GAIN * V_MAX, V_MAX + 0.5)
        if not front:
            return (aim[0] * speed, aim[1] * speed)
        _d, bearing, _i, _rf = front[0]
        # swerve to the side the human is not on
        side = -1.0 if bearing > 0.0 else 1.0
        nx, ny = -aim[1] * side, aim[0] * side
        tx = to_wp[0] + nx * PASS_OFFSET * 2.0
        ty = to_wp[1] + ny * PASS_OFFSET * 2.0
        dt_ = math.hypot(tx, ty)
        if dt_ < 1e-9:
            return (0.0, 0.0)
        return (tx / dt_ * speed, ty / dt_ * speed)
    raise ValueError(f"unknown action {action!r}")


def step(snap: SimSnapshot, action: str, scenario: Scenario) -> SimSnapshot:
    dt = scenario.dt
    segs = _active_segments(scenario, snap.door_open)
    seg_arr = _seg_array(segs)

    # humans: social forces, speed clamp, wall slide
    new_humans = []
    n = len(snap.humans)
    if n:
        pos = np.array([h[0] for h in snap.humans])
        vel = np.array([h[1] for h in snap.humans])
        goal = np.array([h.goal for h in scenario.humans])
        speed = np.array([h.speed for h in scenario.humans])
        acc = human_accels(
            pos, vel, goal, speed,
            np.array(snap.robot_pos), seg_arr,
            SFM_A, SFM_B, SFM_TAU, AGENT_RADIUS, ROBOT_CLEARANCE,
        )
        for i in range(n):
            vx = vel[i, 0] + acc[i, 0] * dt
            vy = vel[i, 1] + acc[i, 1] * dt
            cap = HUMAN_SPEED_CAP * max(speed[i], 0.1)
            sp = math.hypot(vx, vy)
            if sp > cap:
                vx, vy = vx / sp * cap, vy / sp * cap
            p_new, v_eff = _move_clamped(
                (pos[i, 0], pos[i, 1]), (vx, vy), dt, segs, AGENT_RADIUS
            )
            new_humans.append((p_new, v_eff))

    # robot: action primitive -> acceleration-limited velocity -> slide
    v_cmd = _command_velocity(snap, action, scenario)
    dvx = v_cmd[0] - snap.robot_vel[0]
    dvy = v_cmd[1] - snap.robot_vel[1]
    dv = math.hypot(dvx, dvy)
    limit = A_MAX * dt
    if dv > limit:
        dvx, dvy = dvx / dv * limit, dvy / dv * limit
    rv = (snap.robot_vel[0] + dvx, snap.robot_vel[1] + dvy)
    r_new, rv_eff = _move_clamped(snap.robot_pos, rv, dt, segs, AGENT_RADIUS)
    heading = snap.robot_heading
    if math.hypot(*rv_eff) > 0.05:
        heading = math.atan2(rv_eff[1], rv_eff[0])

    # waypoint advance
    route = scenario.route()
    wp_index = snap.wp_index
    while wp_index < len(route) - 1 and (
        math.hypot(route[wp_index][0] - r_new[0], route[wp_index][1] - r_new[1])
        < WAYPOINT_RADIUS
    ):
        wp_index += 1

    # door: consecutive waiting inside the trigger radius opens it for good
    door_open = snap.door_open
    door_wait = snap.door_wait
    if scenario.door is not None and not door_open:
        mid = scenario.door.midpoint
        waiting = False
        if (
            math.hypot(r_new[0] - mid[0], r_new[1] - mid[1])
            <= scenario.door.trigger_radius
            and math.hypot(*v_cmd) < WAIT_SPEED
        ):
            waiting = True
        else:
            for p_h, v_h in new_humans:
                if (
                    math.hypot(p_h[0] - mid[0], p_h[1] - mid[1])
                    <= scenario.door.trigger_radius
                    and math.hypot(*v_h) < WAIT_SPEED
                ):
                    waiting = True
                    break
        door_wait = door_wait + dt if waiting else 0.0
        if door_wait >= scenario.door.open_delay:
            door_open = True

    return SimSnapshot(
        tick=snap.tick + 1,
        robot_pos=r_new,
        robot_vel=rv_eff,
        robot_heading=heading,
        wp_index=wp_index,
        humans=tuple(new_humans),
        door_open=door_open,
        door_wait=door_wait,
        action=action,
    )


def tick_metrics(snap: SimSnapshot) -> tuple:
    """(force, blame) for the snapshot's instantaneous configuration."""
    if not snap.humans:
        return (0.0, 0.0)
    pos = np.array([h[0] for h in snap.humans])
    force, blame = metrics_tick(
        np.array(snap.robot_pos), np.array(snap.robot_vel), pos,
        SFM_A, SFM_B, AGENT_RADIUS, METRIC_CUTOFF,
    )
    return (float(force), float(blame))


# --- sensor extraction ----------------------------------------------------


def _to_robot_frame(p, origin, heading):
    c, s = math.cos(heading), math.sin(heading)
    dx, dy = p[0] - origin[0], p[1] - origin[1]
    return (c * dx + s * dy, -s * dx + c * dy)


def _rotate_to_robot(v, heading):
    c, s = math.cos(heading), math.sin(heading)
    return (c * v[0] + s * v[1], -s * v[0] + c * v[1])


def extract_world(snap: SimSnapshot, scenario: Scenario) -> WorldState:
    """Robot-frame sensor view: goal/waypoint/door, and the nearest front
    human plus the nearest remaining front human on each side.  Humans are
    relative: positions in the robot frame, velocities relative to the
    robot's.  Absent slots hold a far sentinel with zero velocity."""
    origin, heading = snap.robot_pos, snap.robot_heading
    route = scenario.route()
    wp = route[min(snap.wp_index, len(route) - 1)]

    values = {
        "p_g": _to_robot_frame(scenario.robot_goal, origin, heading),
        "p_l": _to_robot_frame(wp, origin, heading),
    }
    if scenario.door is not None:
        values["p_d"] = _to_robot_frame(scenario.door.midpoint, origin, heading)
        values["s_d"] = 1.0 if snap.door_open else 0.0
    else:
        values["p_d"] = SENTINEL
        values["s_d"] = 1.0

    front = _front_humans(snap)
    slots = {"p_h": SENTINEL, "v_h": (0.0, 0.0),
             "p_hl": SENTINEL, "v_hl": (0.0, 0.0),
             "p_hr": SENTINEL, "v_hr": (0.0, 0.0)}
    if front:
        def rel_vel(i):
            hv = snap.humans[i][1]
            return _rotate_to_robot(
                (hv[0] - snap.robot_vel[0], hv[1] - snap.robot_vel[1]), heading
            )

        _d, _b, i0, rf0 = front[0]
        slots["p_h"], slots["v_h"] = rf0, rel_vel(i0)
        rest = front[1:]
        left = next((t for t in rest if t[3][1] > 0.0), None)
        if left is not None:
            slots["p_hl"], slots["v_hl"] = left[3], rel_vel(left[2])
        right = next((t for t in rest if t[3][1] <= 0.0), None)
        if right is not None:
            slots["p_hr"], slots["v_hr"] = right[3], rel_vel(right[2])
    values.update(slots)

    segs = [
        (*_to_robot_frame(seg[0:2], origin, heading), *_to_robot_frame(seg[2:4], origin, heading))
        for seg in _active_segments(scenario, snap.door_open)
    ]
    discs = [
        (*_to_robot_frame(pos, origin, heading), AGENT_RADIUS)
        for pos, _vel in snap.humans
    ]
    return WorldState(values, Obstacles(tuple(segs), tuple(discs)))


class SnapshotRing:
    """Fixed-capacity history of snapshots for pause/rewind."""

    def __init__(self, capacity: int = 1200):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._buf: deque = deque(maxlen=capacity)

    def push(self, snap: SimSnapshot) -> None:
        self._buf.append(snap)

    def __len__(self) -> int:
        return len(self._buf)

    @property
    def latest(self) -> SimSnapshot:
        return self._buf[-1]

    def back(self, n: int) -> SimSnapshot:
        """The snapshot n ticks before the latest (n=0 is the latest)."""
        if n < 0 or n >= len(self._buf):
            raise IndexError(f"cannot rewind {n} ticks: have {len(self._buf)}")
        return self._buf[len(self._buf) - 1 - n]

    def truncate_to(self, snap: SimSnapshot) -> None:
        """Drop everything after the given snapshot (by tick)."""
        while self._buf and self._buf[-1].tick > snap.tick:
            self._buf.pop()
