"""Backend parity for the simulator's numeric kernels.

The compiled and vectorized implementations must agree on random states,
and the IDIPS_NO_NUMBA flag must select the numpy path in a fresh
interpreter.
"""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from idips.sim import kernels as K


def _random_state(rng, n_humans, n_segs):
    pos = rng.uniform(-5.0, 5.0, size=(n_humans, 2))
    vel = rng.uniform(-1.0, 1.0, size=(n_humans, 2))
    goal = rng.uniform(-8.0, 8.0, size=(n_humans, 2))
    speed = rng.uniform(0.3, 1.5, size=n_humans)
    robot_pos = rng.uniform(-5.0, 5.0, size=2)
    segs = rng.uniform(-6.0, 6.0, size=(n_segs, 4))
    return pos, vel, goal, speed, robot_pos, segs


needs_jit = pytest.mark.skipif(
    K.human_accels_jit is None, reason="numba backend not active"
)


@needs_jit
def test_accel_backends_agree_on_random_states():
    rng = np.random.RandomState(7)
    for _ in range(25):
        n = rng.randint(1, 7)
        m = rng.randint(0, 5)
        pos, vel, goal, speed, robot_pos, segs = _random_state(rng, n, m)
        args = (pos, vel, goal, speed, robot_pos, segs,
                K.SFM_A, K.SFM_B, K.SFM_TAU, K.AGENT_RADIUS, K.ROBOT_CLEARANCE)
        a_jit = K.human_accels_jit(*args)
        a_np = K.human_accels_np(*args)
        np.testing.assert_allclose(a_jit, a_np, rtol=1e-9, atol=1e-9)


@needs_jit
def test_metric_backends_agree_on_random_states():
    rng = np.random.RandomState(11)
    for _ in range(50):
        n = rng.randint(0, 8)
        pos = rng.uniform(-4.0, 4.0, size=(n, 2))
        robot_pos = rng.uniform(-2.0, 2.0, size=2)
        robot_vel = rng.uniform(-1.0, 1.0, size=2)
        args = (robot_pos, robot_vel, pos,
                K.SFM_A, K.SFM_B, K.AGENT_RADIUS, K.METRIC_CUTOFF)
        f_jit, b_jit = K.metrics_jit(*args)
        f_np, b_np = K.metrics_np(*args)
        assert f_jit == pytest.approx(f_np, rel=1e-12, abs=1e-12)
        assert b_jit == pytest.approx(b_np, rel=1e-12, abs=1e-12)


def test_empty_crowd_edge_cases():
    zero = np.zeros((0, 2))
    out = K.human_accels_np(
        zero, zero, zero, np.zeros(0), np.zeros(2), np.zeros((0, 4)),
        K.SFM_A, K.SFM_B, K.SFM_TAU, K.AGENT_RADIUS, K.ROBOT_CLEARANCE,
    )
    assert out.shape == (0, 2)
    f, b = K.metrics_np(
        np.zeros(2), np.ones(2), zero,
        K.SFM_A, K.SFM_B, K.AGENT_RADIUS, K.METRIC_CUTOFF,
    )
    assert f == 0.0 and b == 0.0


def test_isolated_human_relaxes_toward_goal():
    # one human, no walls, robot far away: accel is exactly the goal
    # relaxation term (desired velocity minus current) / tau
    pos = np.array([[0.0, 0.0]])
    vel = np.array([[0.2, -0.1]])
    goal = np.array([[10.0, 0.0]])
    speed = np.array([1.2])
    robot_pos = np.array([500.0, 500.0])
    segs = np.zeros((0, 4))
    out = K.human_accels_np(
        pos, vel, goal, speed, robot_pos, segs,
        K.SFM_A, K.SFM_B, K.SFM_TAU, K.AGENT_RADIUS, K.ROBOT_CLEARANCE,
    )
    expect = (np.array([1.2, 0.0]) - vel[0]) / K.SFM_TAU
    # robot term at distance ~707 decays to ~exp(-2350), true zero in float
    np.testing.assert_allclose(out[0], expect, rtol=0, atol=1e-300)


def test_arrived_human_brakes():
    pos = np.array([[5.0, 1.0]])
    vel = np.array([[0.8, 0.0]])
    goal = np.array([[5.1, 1.0]])  # inside the 0.3 arrival radius
    out = K.human_accels_np(
        pos, vel, goal, np.array([1.0]), np.array([500.0, 500.0]),
        np.zeros((0, 4)),
        K.SFM_A, K.SFM_B, K.SFM_TAU, K.AGENT_RADIUS, K.ROBOT_CLEARANCE,
    )
    np.testing.assert_allclose(out[0], -vel[0] / K.SFM_TAU, atol=1e-300)


def test_wall_pushes_human_away():
    # human just above a horizontal wall: net y-accel must point up once
    # the goal term is subtracted out
    pos = np.array([[2.0, 0.4]])
    vel = np.array([[0.0, 0.0]])
    goal = np.array([[2.0, 0.4]])
    segs = np.array([[0.0, 0.0, 4.0, 0.0]])
    out = K.human_accels_np(
        pos, vel, goal, np.array([1.0]), np.array([500.0, 500.0]), segs,
        K.SFM_A, K.SFM_B, K.SFM_TAU, K.AGENT_RADIUS, K.ROBOT_CLEARANCE,
    )
    assert out[0, 1] > 0.0
    assert abs(out[0, 0]) < 1e-12


def test_blame_only_counts_approach():
    pos = np.array([[2.0, 0.0]])
    away = np.array([-1.0, 0.0])
    toward = np.array([1.0, 0.0])
    origin = np.zeros(2)
    f1, b1 = K.metrics_np(origin, away, pos, K.SFM_A, K.SFM_B,
                          K.AGENT_RADIUS, K.METRIC_CUTOFF)
    f2, b2 = K.metrics_np(origin, toward, pos, K.SFM_A, K.SFM_B,
                          K.AGENT_RADIUS, K.METRIC_CUTOFF)
    assert f1 == f2 > 0.0
    assert b1 == 0.0
    assert b2 == pytest.approx(f2)  # head-on: full force attributed
    expect = K.SFM_A * math.exp((2 * K.AGENT_RADIUS - 2.0) / K.SFM_B)
    assert f1 == pytest.approx(expect)


def test_backend_name_matches_environment():
    assert K.BACKEND in ("numba", "numpy")
    if K.human_accels_jit is not None:
        assert K.BACKEND == "numba"
        assert K.human_accels is K.human_accels_jit
    else:
        assert K.BACKEND == "numpy"
        assert K.human_accels is K.human_accels_np


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, IDIPS_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "from idips.sim import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_env_flag_zero_keeps_default():
    env = dict(os.environ, IDIPS_NO_NUMBA="0")
    out = subprocess.run(
        [sys.executable, "-c",
         "from idips.sim import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() in ("numba", "numpy")
    # in this environment numba is importable, so 0 means the jit path
    try:
        import numba  # noqa: F401
    except ImportError:
        pass
    else:
        assert out.stdout.strip() == "numba"


_TRIAL_SCRIPT = (
    "from idips.sim import corridor_scenario, init_snapshot, step\n"
    "scn = corridor_scenario(3)\n"
    "snap = init_snapshot(scn)\n"
    "for _ in range(400):\n"
    "    snap = step(snap, 'GoAlone', scn)\n"
    "print(float(snap.robot_pos[0]), float(snap.robot_pos[1]))\n"
    "for p, v in snap.humans:\n"
    "    print(float(p[0]), float(p[1]), float(v[0]), float(v[1]))\n"
)


def _run_trial_subprocess(flag):
    env = dict(os.environ)
    env.pop("IDIPS_NO_NUMBA", None)
    if flag:
        env["IDIPS_NO_NUMBA"] = flag
    out = subprocess.run(
        [sys.executable, "-c", _TRIAL_SCRIPT],
        env=env, capture_output=True, text=True, check=True,
    )
    return out.stdout


def test_numpy_backend_is_bitwise_deterministic():
    assert _run_trial_subprocess("1") == _run_trial_subprocess("1")


def test_backends_agree_over_long_horizon():
    """400-tick trajectories on both backends agree to float summation
    noise; byte identity is only promised within a single backend."""
    def parse(out):
        return np.array(
            [float(tok) for ln in out.strip().splitlines() for tok in ln.split()]
        )

    a = parse(_run_trial_subprocess(""))
    b = parse(_run_trial_subprocess("1"))
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-9)
