"""End-to-end checks of the command line interface.

Pipelines run in a tmpdir through main() with capsys; usage errors go
through a subprocess so argparse's exit code is observed directly.
"""

import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from idips.cli import main
from idips.demos import save_demos
from idips.domain import social_domain
from idips.parser import parse_policy
from idips.sim import corridor_scenario, run_trial

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def demo_file(tmp_path_factory):
    """Demonstrations gathered by replaying the two-branch golden policy
    on a handful of corridor seeds."""
    dom = social_domain()
    teacher = parse_policy((GOLDEN / "nice.asp").read_text(), dom)
    demos = []
    for seed in range(3):
        _m, trace = run_trial(corridor_scenario(seed), teacher)
        demos.extend(trace)
    path = tmp_path_factory.mktemp("demos") / "demos.json"
    save_demos(demos, path)
    return str(path)


def test_no_subcommand_is_usage_error():
    out = subprocess.run(
        [sys.executable, "-m", "idips.cli"], capture_output=True, text=True
    )
    assert out.returncode == 2


def test_unknown_flag_is_usage_error():
    out = subprocess.run(
        [sys.executable, "-m", "idips.cli", "eval", "--frobnicate"],
        capture_output=True, text=True,
    )
    assert out.returncode == 2


def test_missing_demos_file_exits_one(tmp_path, capsys):
    rc = main(["eval", "--demos", str(tmp_path / "nope.json"),
               "--policy", str(GOLDEN / "nice.asp")])
    assert rc == 1
    assert "FileNotFoundError" in capsys.readouterr().err


def test_bad_policy_reports_typed_error(tmp_path, capsys, demo_file):
    bad = tmp_path / "bad.asp"
    bad.write_text("if (start == GoAlone && norm(p_h) <: return Halt\n")
    rc = main(["eval", "--demos", demo_file, "--policy", str(bad)])
    assert rc == 1
    assert "ParseError" in capsys.readouterr().err


def test_type_error_reports_typed_error(tmp_path, capsys, demo_file):
    bad = tmp_path / "bad.asp"
    bad.write_text(
        "if (start == GoAlone && norm(p_h) > x [0,0,0] = 1.0): return Halt\n"
    )
    rc = main(["eval", "--demos", demo_file, "--policy", str(bad)])
    assert rc == 1
    err = capsys.readouterr().err
    assert "DimensionMismatch" in err


def test_synth_eval_sim_pipeline(tmp_path, capsys, demo_file):
    out_asp = tmp_path / "learned.asp"
    rc = main(["synth", "--demos", demo_file, "-o", str(out_asp)])
    synth_out = capsys.readouterr().out
    assert rc == 0
    assert "score" in synth_out and "wrote" in synth_out
    text = out_asp.read_text()
    policy = parse_policy(text, social_domain())
    assert len(policy.branches) >= 1

    rc = main(["eval", "--demos", demo_file, "--policy", str(out_asp)])
    assert rc == 0
    assert "overall" in capsys.readouterr().out

    csv_path = tmp_path / "metrics.csv"
    rc = main(["sim", "--policy", str(out_asp), "--scenario", "corridor",
               "--trials", "2", "--metrics", str(csv_path)])
    assert rc == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "policy,scenario,seed,success,time_s,force,blame"
    assert len(lines) == 3  # header + 2 trials


def test_optimize_roundtrip(tmp_path, capsys, demo_file):
    out_asp = tmp_path / "tuned.asp"
    rc = main(["optimize", "--demos", demo_file,
               "--policy", str(GOLDEN / "nice.asp"), "-o", str(out_asp)])
    assert rc == 0
    assert "->" in capsys.readouterr().out
    tuned = parse_policy(out_asp.read_text(), social_domain())
    base = parse_policy((GOLDEN / "nice.asp").read_text(), social_domain())
    assert len(tuned.branches) == len(base.branches)


def test_repair_report_is_schema_valid(tmp_path, capsys, demo_file):
    # loosen a threshold so the teacher's own demos disagree with it
    broken = tmp_path / "broken.asp"
    broken.write_text(
        "if (start == GoAlone && norm(p_h) < n_near [1,0,0] = 0.2): return Halt\n"
        "if (start == Halt && norm(p_h) > n_far [1,0,0] = 9.0): return GoAlone\n"
    )
    out_asp = tmp_path / "fixed.asp"
    report_path = tmp_path / "report.json"
    rc = main(["repair", "--demos", demo_file, "--policy", str(broken),
               "-o", str(out_asp), "--report", str(report_path)])
    capsys.readouterr()
    assert rc == 0
    report = json.loads(report_path.read_text())
    schema = json.loads(
        (Path(__file__).parents[1] / "src" / "idips" / "data"
         / "repair_report.schema.json").read_text()
    )
    jsonschema.validate(report, schema)
    assert report["policy_score_after"] >= report["policy_score_before"]


def test_synth_exits_one_below_min_score(tmp_path, capsys):
    # two contradictory demos cap every policy at half score
    dom = social_domain()
    _m, trace = run_trial(corridor_scenario(0), parse_policy("", dom))
    import dataclasses

    d = trace[0]
    conflict = [d, dataclasses.replace(d, next="Pass")]
    path = tmp_path / "conflict.json"
    save_demos(conflict, path)
    rc = main(["synth", "--demos", str(path), "-o", str(tmp_path / "o.asp")])
    capsys.readouterr()
    assert rc == 1


def test_synth_rerun_is_byte_identical(tmp_path, capsys, demo_file):
    outs = []
    for name in ("a.asp", "b.asp"):
        out = tmp_path / name
        rc = main(["synth", "--demos", demo_file, "-o", str(out)])
        capsys.readouterr()
        assert rc == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_sim_rerun_is_byte_identical(tmp_path, capsys):
    csvs = []
    for name in ("a.csv", "b.csv"):
        csv_path = tmp_path / name
        rc = main(["sim", "--policy", str(GOLDEN / "nice.asp"),
                   "--scenario", "corridor", "--trials", "3",
                   "--metrics", str(csv_path)])
        capsys.readouterr()
        assert rc == 0
        csvs.append(csv_path.read_bytes())
    assert csvs[0] == csvs[1]


def test_sim_accepts_scenario_file(tmp_path, capsys):
    from idips.sim import save_scenario

    scn_path = tmp_path / "scn.json"
    save_scenario(corridor_scenario(5), scn_path)
    rc = main(["sim", "--policy", str(GOLDEN / "nice.asp"),
               "--scenario", str(scn_path), "--trials", "1"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "scn" in out
