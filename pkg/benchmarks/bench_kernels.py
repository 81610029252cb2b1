"""Times the numba and numpy simulator kernels against each other.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 4,16,128 --trial

The kernel table times single calls on synthetic crowds.  --trial also
wall-clocks a full corridor rollout per backend in subprocesses, since
the backend is chosen once at import time via IDIPS_NO_NUMBA.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from idips.sim import kernels


def _crowd(rng, n):
    pos = rng.uniform(-5, 5, (n, 2))
    vel = rng.uniform(-1, 1, (n, 2))
    goal = rng.uniform(-6, 6, (n, 2))
    speed = rng.uniform(0.6, 1.2, n)
    robot = np.array([0.5, 0.1])
    robot_vel = np.array([0.8, 0.0])
    segs = np.array(
        [
            [-6.0, 2.0, 6.0, 2.0],
            [-6.0, -2.0, 6.0, -2.0],
            [2.0, 0.7, 2.0, 2.0],
        ]
    )
    return pos, vel, goal, speed, robot, robot_vel, segs


def _best_us(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number * 1e6


def bench_kernels(sizes, repeat, number):
    if kernels.human_accels_jit is None:
        print("numba path unavailable (IDIPS_NO_NUMBA set or numba missing); "
              "timing numpy only")
    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        pos, vel, goal, speed, robot, robot_vel, segs = _crowd(rng, n)
        a_args = (pos, vel, goal, speed, robot, segs,
                  kernels.SFM_A, kernels.SFM_B, kernels.SFM_TAU,
                  kernels.AGENT_RADIUS, kernels.ROBOT_CLEARANCE)
        m_args = (robot, robot_vel, pos,
                  kernels.SFM_A, kernels.SFM_B,
                  kernels.AGENT_RADIUS, kernels.METRIC_CUTOFF)
        timings = {}
        timings["accel numpy"] = _best_us(
            lambda: kernels.human_accels_np(*a_args), repeat, number)
        timings["metric numpy"] = _best_us(
            lambda: kernels.metrics_np(*m_args), repeat, number)
        if kernels.human_accels_jit is not None:
            kernels.human_accels_jit(*a_args)  # compile before timing
            kernels.metrics_jit(*m_args)
            timings["accel numba"] = _best_us(
                lambda: kernels.human_accels_jit(*a_args), repeat, number)
            timings["metric numba"] = _best_us(
                lambda: kernels.metrics_jit(*m_args), repeat, number)
        rows.append((n, timings))

    have_jit = kernels.human_accels_jit is not None
    print(f"\nper-call microseconds, best of {repeat} x {number} calls")
    head = f"{'n':>5} {'accel np':>10} {'metric np':>10}"
    if have_jit:
        head += f" {'accel nb':>10} {'metric nb':>10} {'accel ratio':>12}"
    print(head)
    for n, t in rows:
        line = f"{n:>5} {t['accel numpy']:>10.1f} {t['metric numpy']:>10.1f}"
        if have_jit:
            ratio = t["accel numpy"] / t["accel numba"]
            line += (f" {t['accel numba']:>10.1f} {t['metric numba']:>10.1f}"
                     f" {ratio:>11.1f}x")
        print(line)


_TRIAL_SNIPPET = """
import time
from idips.domain import social_domain
from idips.sim import corridor_scenario, run_trial, kernels
from idips.sim.generators import nice_policy
policy = nice_policy(social_domain())
run_trial(corridor_scenario(0, 6), policy)  # warm up compilation
t0 = time.perf_counter()
for s in range(5):
    run_trial(corridor_scenario(s, 6), policy)
print(f"{kernels.BACKEND}: {(time.perf_counter() - t0) / 5 * 1e3:.1f} ms/trial")
"""


def bench_trial():
    print("\nfull corridor rollout, 6 humans, mean of 5 trials")
    for flag in ("0", "1"):
        env = dict(os.environ, IDIPS_NO_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, "-c", _TRIAL_SNIPPET],
            capture_output=True, text=True, env=env, check=True,
        )
        print("  " + out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="2,4,8,16,64",
                    help="comma-separated crowd sizes")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=200,
                    help="calls per timing sample")
    ap.add_argument("--trial", action="store_true",
                    help="also time full rollouts per backend")
    args = ap.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]
    bench_kernels(sizes, args.repeat, args.number)
    if args.trial:
        bench_trial()


if __name__ == "__main__":
    main()
