"""Numeric kernels for the crowd simulator.

Two implementations of each kernel: a scalar-loop version compiled with
numba when available, and a vectorized numpy twin.  Setting IDIPS_NO_NUMBA
to a non-empty value other than 0 (or numba failing to import) selects the
numpy path; both produce the same numbers up to float summation order.
benchmarks/bench_kernels.py times one against the other.
"""

from __future__ import annotations

import math
import os

import numpy as np

# social-force constants: repulsion amplitude/range, relaxation time,
# agent disc radius, metric interaction cutoff
SFM_A = 2.0
SFM_B = 0.3
SFM_TAU = 0.5
AGENT_RADIUS = 0.3
# humans keep a wider personal-space margin from the robot than from each
# other, so given time they arc around it; the metric still uses the
# physical disc sum
ROBOT_CLEARANCE = 0.9
METRIC_CUTOFF = 3.0


def _human_accels_loop(pos, vel, goal, speed, robot_pos, segs, A, B, tau, radius, robot_margin):
    """Social-force accelerations, one row per human.

    pos/vel/goal: (n,2); speed: (n,); robot_pos: (2,); segs: (m,4).
    Goal attraction relaxes toward the desired velocity; humans within
    0.3 m of their goal want zero velocity.  Repulsion is exponential in
    surface gap from other humans, the robot disc, and wall segments.
    """
    n = pos.shape[0]
    out = np.zeros((n, 2))
    for i in range(n):
        gx = goal[i, 0] - pos[i, 0]
        gy = goal[i, 1] - pos[i, 1]
        gd = math.sqrt(gx * gx + gy * gy)
        if gd > 0.3:
            dvx = speed[i] * gx / gd - vel[i, 0]
            dvy = speed[i] * gy / gd - vel[i, 1]
        else:
            dvx = -vel[i, 0]
            dvy = -vel[i, 1]
        ax = dvx / tau
        ay = dvy / tau
        for j in range(n):
            if j == i:
                continue
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            d = math.sqrt(dx * dx + dy * dy)
            if d > 1e-9:
                f = A * math.exp((2.0 * radius - d) / B)
                ax += f * dx / d
                ay += f * dy / d
        dx = pos[i, 0] - robot_pos[0]
        dy = pos[i, 1] - robot_pos[1]
        d = math.sqrt(dx * dx + dy * dy)
        if d > 1e-9:
            f = A * math.exp((robot_margin - d) / B)
            ax += f * dx / d
            ay += f * dy / d
        for s in range(segs.shape[0]):
            sx = segs[s, 2] - segs[s, 0]
            sy = segs[s, 3] - segs[s, 1]
            L2 = sx * sx + sy * sy
            if L2 > 0.0:
                t = ((pos[i, 0] - segs[s, 0]) * sx + (pos[i, 1] - segs[s, 1]) * sy) / L2
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
            else:
                t = 0.0
            cx = segs[s, 0] + t * sx
            cy = segs[s, 1] + t * sy
            dx = pos[i, 0] - cx
            dy = pos[i, 1] - cy
            d = math.sqrt(dx * dx + dy * dy)
            if d > 1e-9:
                f = A * math.exp((radius - d) / B)
                ax += f * dx / d
                ay += f * dy / d
        out[i, 0] = ax
        out[i, 1] = ay
    return out


def _human_accels_np(pos, vel, goal, speed, robot_pos, segs, A, B, tau, radius, robot_margin):
    n = pos.shape[0]
    if n == 0:
        return np.zeros((0, 2))
    to_goal = goal - pos
    gd = np.hypot(to_goal[:, 0], to_goal[:, 1])
    desired = np.where(
        (gd > 0.3)[:, None], speed[:, None] * to_goal / np.maximum(gd, 1e-300)[:, None], 0.0
    )
    acc = (desired - vel) / tau

    diff = pos[:, None, :] - pos[None, :, :]  # i minus j
    d = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(d, np.inf)
    mag = A * np.exp((2.0 * radius - d) / B) / np.maximum(d, 1e-9)
    mag[d <= 1e-9] = 0.0
    acc += (mag[..., None] * diff).sum(axis=1)

    rdiff = pos - robot_pos[None, :]
    rd = np.hypot(rdiff[:, 0], rdiff[:, 1])
    rmag = np.where(rd > 1e-9, A * np.exp((robot_margin - rd) / B) / np.maximum(rd, 1e-9), 0.0)
    acc += rmag[:, None] * rdiff

    if segs.shape[0]:
        a = segs[None, :, 0:2]
        b = segs[None, :, 2:4]
        ab = b - a
        L2 = np.maximum((ab * ab).sum(-1), 1e-300)
        t = np.clip(((pos[:, None, :] - a) * ab).sum(-1) / L2, 0.0, 1.0)
        closest = a + t[..., None] * ab
        wdiff = pos[:, None, :] - closest
        wd = np.hypot(wdiff[..., 0], wdiff[..., 1])
        wmag = np.where(wd > 1e-9, A * np.exp((radius - wd) / B) / np.maximum(wd, 1e-9), 0.0)
        acc += (wmag[..., None] * wdiff).sum(axis=1)
    return acc


def _metrics_loop(robot_pos, robot_vel, pos, A, B, radius, cutoff):
    """Per-tick (force, blame): summed exponential proximity over humans
    within the cutoff, and its share attributed to robot motion toward
    each human."""
    force = 0.0
    blame = 0.0
    sp = math.sqrt(robot_vel[0] * robot_vel[0] + robot_vel[1] * robot_vel[1])
    for i in range(pos.shape[0]):
        dx = pos[i, 0] - robot_pos[0]
        dy = pos[i, 1] - robot_pos[1]
        d = math.sqrt(dx * dx + dy * dy)
        if d > cutoff or d <= 1e-9:
            continue
        f = A * math.exp((2.0 * radius - d) / B)
        force += f
        if sp > 1e-9:
            toward = (robot_vel[0] * dx + robot_vel[1] * dy) / (sp * d)
            if toward > 0.0:
                blame += f * toward
    return force, blame


def _metrics_np(robot_pos, robot_vel, pos, A, B, radius, cutoff):
    if pos.shape[0] == 0:
        return 0.0, 0.0
    diff = pos - robot_pos[None, :]
    d = np.hypot(diff[:, 0], diff[:, 1])
    near = (d <= cutoff) & (d > 1e-9)
    if not near.any():
        return 0.0, 0.0
    f = A * np.exp((2.0 * radius - d[near]) / B)
    force = float(f.sum())
    sp = math.hypot(robot_vel[0], robot_vel[1])
    if sp <= 1e-9:
        return force, 0.0
    toward = (diff[near] @ robot_vel) / (sp * d[near])
    blame = float((f * np.maximum(toward, 0.0)).sum())
    return force, blame


def _numba_wanted() -> bool:
    flag = os.environ.get("IDIPS_NO_NUMBA", "")
    return flag in ("", "0")


human_accels_np = _human_accels_np
metrics_np = _metrics_np
human_accels_jit = None
metrics_jit = None

if _numba_wanted():
    try:
        from numba import njit

        human_accels_jit = njit(cache=True)(_human_accels_loop)
        metrics_jit = njit(cache=True)(_metrics_loop)
    except ImportError:
        pass

if human_accels_jit is not None:
    human_accels = human_accels_jit
    metrics_tick = metrics_jit
    BACKEND = "numba"
else:
    human_accels = human_accels_np
    metrics_tick = metrics_np
    BACKEND = "numpy"
