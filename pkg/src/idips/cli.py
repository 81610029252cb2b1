"""Command-line entry points for the policy toolchain.

Subcommands: synth, optimize, repair, eval, sim, serve.  Usage mistakes
exit 2 (argparse), domain failures print the typed error and exit 1.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .demos import load_demos, policy_demo_score
from .domain import DomainDefinition, load_domain, social_domain
from .errors import IdipsError
from .evaluator import eval_policy
from .parser import load_policy, save_policy
from .printer import print_policy
from .synthesis import SynthConfig, idips, optimize_params, report_to_json


def _resolve_domain(value: str) -> DomainDefinition:
    """A domain file path, or the built-in name "social"."""
    if value == "social":
        return social_domain()
    return load_domain(value)


def _cfg(args: argparse.Namespace) -> SynthConfig:
    return SynthConfig(min_score=args.min_score)


def cmd_synth(args: argparse.Namespace) -> int:
    dom = _resolve_domain(args.domain)
    demos = load_demos(args.demos, dom)
    p0 = load_policy(args.policy, dom) if args.policy else None
    result = idips(dom, demos, p0, _cfg(args))
    save_policy(result.policy, args.output)
    print(f"score {result.policy_score_after:.3f} on {len(demos)} demos")
    print(f"wrote {args.output}")
    return 0 if result.policy_score_after >= args.min_score else 1


def cmd_optimize(args: argparse.Namespace) -> int:
    dom = _resolve_domain(args.domain)
    demos = load_demos(args.demos, dom)
    policy = load_policy(args.policy, dom)
    before = policy_demo_score(policy, demos)
    tuned = optimize_params(dom, demos, policy)
    after = policy_demo_score(tuned, demos)
    save_policy(tuned, args.output)
    print(f"score {before:.3f} -> {after:.3f}")
    print(f"wrote {args.output}")
    return 0


def cmd_repair(args: argparse.Namespace) -> int:
    dom = _resolve_domain(args.domain)
    demos = load_demos(args.demos, dom)
    policy = load_policy(args.policy, dom)
    result = idips(dom, demos, policy, _cfg(args))
    save_policy(result.policy, args.output)
    report = report_to_json(result)
    Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    print(
        f"score {result.policy_score_before:.3f} -> {result.policy_score_after:.3f},"
        f" {len(result.report)} guard(s) visited"
    )
    print(f"wrote {args.output} and {args.report}")
    return 0 if result.policy_score_after >= args.min_score else 1


def cmd_eval(args: argparse.Namespace) -> int:
    dom = _resolve_domain(args.domain)
    demos = load_demos(args.demos, dom)
    policy = load_policy(args.policy, dom)

    counts: dict[tuple, list] = {}
    for d in demos:
        got = eval_policy(policy, d.prev, d.state)
        k = (d.prev, d.next)
        row = counts.setdefault(k, [0, 0])
        row[0] += 1
        row[1] += got == d.next
    width = max((len(f"{a}->{b}") for a, b in counts), default=10)
    for (a, b), (n, ok) in sorted(counts.items()):
        print(f"{f'{a}->{b}':{width}s}  {ok:5d}/{n:<5d}  {ok / n:6.1%}")
    total = policy_demo_score(policy, demos)
    print(f"{'overall':{width}s}  {total:6.1%}")
    return 0


def _scenario_source(value: str):
    """A generator per seed: built-in scenario family name, or a file."""
    from .sim import corridor_scenario, door_scenario, load_scenario

    if value == "corridor":
        return corridor_scenario
    if value == "door":
        return door_scenario
    scn = load_scenario(value)
    return lambda seed: scn.with_seed(seed)


def cmd_sim(args: argparse.Namespace) -> int:
    from .sim import aggregate, run_suite, write_csv

    dom = _resolve_domain(args.domain)
    policy = load_policy(args.policy, dom)
    gen = _scenario_source(args.scenario)
    name = Path(args.policy).stem
    sname = args.scenario if args.scenario in ("corridor", "door") else Path(args.scenario).stem
    rows = run_suite({name: policy}, {sname: gen}, n_trials=args.trials, base_seed=args.seed)
    if args.metrics:
        write_csv(rows, args.metrics)
        print(f"wrote {args.metrics}")
    for key, agg in sorted(aggregate(rows).items()):
        mean_t, ci_t = agg["time"]
        mean_f, ci_f = agg["force"]
        mean_b, ci_b = agg["blame"]
        print(
            f"{key[0]} on {key[1]}: success {agg['success_rate']:.0%} of {agg['trials']},"
            f" time {mean_t:.1f}±{ci_t:.1f}s,"
            f" force {mean_f:.2f}±{ci_f:.2f}, blame {mean_b:.2f}±{ci_b:.2f}"
        )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(
        scenario=args.scenario,
        policy_path=args.policy,
        domain=_resolve_domain(args.domain),
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="idips", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, demos=True, policy="optional") -> None:
        p.add_argument("--domain", default="social", help="domain file, or 'social'")
        if demos:
            p.add_argument("--demos", required=True, help="demonstrations file")
        if policy == "optional":
            p.add_argument("--policy", help="starting policy file")
        elif policy == "required":
            p.add_argument("--policy", required=True, help="policy file")

    p = sub.add_parser("synth", help="synthesize a policy from demonstrations")
    common(p)
    p.add_argument("--min-score", type=float, default=0.95)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("optimize", help="re-fit policy parameters to demonstrations")
    common(p, policy="required")
    p.add_argument("--min-score", type=float, default=0.95)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("repair", help="extend faulty guards against demonstrations")
    common(p, policy="required")
    p.add_argument("--min-score", type=float, default=0.95)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report", required=True, help="repair report JSON path")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("eval", help="score a policy against demonstrations")
    common(p, policy="required")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sim", help="run simulation trials and report metrics")
    common(p, demos=False, policy="required")
    p.add_argument("--scenario", required=True, help="scenario file, 'corridor', or 'door'")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metrics", help="write per-trial rows to this CSV")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("serve", help="serve the interactive demonstration session")
    common(p, demos=False)
    p.add_argument("--scenario", required=True, help="scenario file, 'corridor', or 'door'")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IdipsError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
