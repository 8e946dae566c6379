import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from vcst_rcp.cli import main
from vcst_rcp.experiment import (ExperimentConfig, read_results_csv, results_csv, run_experiment,
                                 sign_test, summarize)
from vcst_rcp.model import Plan, Scenario
from vcst_rcp.simulation import validate


def csv_body(path):
    return path.read_text().split("\n", 1)[1]


def test_run_row_count_and_summary(tmp_path, capsys):
    rc = main(["run", "--family", "small_dense", "--planners", "vcst,hungarian", "--trials", "5",
               "--seed", "42", "--out", str(tmp_path)])
    assert rc == 0
    rows = read_results_csv((tmp_path / "results.csv").read_text())
    assert len(rows) == 10
    assert {r["seed"] for r in rows} == set(range(42, 47))
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert set(summary["small_dense"]["planners"]) == {"vcst", "hungarian"}
    assert "vcst vs hungarian" in capsys.readouterr().out


def test_csv_is_deterministic(tmp_path):
    args = ["run", "--family", "low_capacity,large_warehouse", "--trials", "3", "--seed", "7",
            "--lambda-svc", "0"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert csv_body(tmp_path / "a" / "results.csv") == csv_body(tmp_path / "b" / "results.csv")


def test_parallel_matches_serial():
    cfg = dict(families=["medium_balanced"], trials=4, seed_base=3)
    serial, _ = run_experiment(ExperimentConfig(**cfg))
    par, _ = run_experiment(ExperimentConfig(jobs=2, **cfg))
    assert results_csv(serial, "t") == results_csv(par, "t")


def test_dump_round_trip(tmp_path):
    out = tmp_path / "d"
    assert main(["dump", "--family", "large_distribution", "--seed", "1", "--lambda-svc", "0",
                 "--out", str(out)]) == 0
    sc = Scenario.from_json(json.loads((out / "scenario.json").read_text()))
    assert sc.to_json() == json.loads((out / "scenario.json").read_text())
    plan_json = json.loads((out / "plan.json").read_text())
    plan = Plan.from_json(plan_json, sc)
    assert plan.to_json() == plan_json
    assert validate(plan, sc) == []
    trunk = json.loads((out / "trunk.json").read_text())
    assert sum(e["flow"] for e in trunk["edges"] if e["from"] == 0) == sc.n_goals
    svg = ET.fromstring((out / "overlay.svg").read_text())
    assert (svg.get("width"), svg.get("height")) == ("400", "400")
    # dumping from the saved scenario reproduces the plan
    again = tmp_path / "e"
    assert main(["dump", "--scenario", str(out / "scenario.json"), "--lambda-svc", "0",
                 "--out", str(again)]) == 0
    assert (again / "plan.json").read_text() == (out / "plan.json").read_text()


def test_single_robot_trunk_has_no_relays(tmp_path):
    assert main(["run", "--family", "custom", "--robots", "1", "--goals", "6", "--trials", "2",
                 "--planners", "vcst", "--dump-trunk", "--dump-plan", "--out", str(tmp_path)]) == 0
    dumps = sorted((tmp_path / "dumps" / "custom").glob("*_trunk.json"))
    assert len(dumps) == 2
    for p in dumps:
        kinds = [n["kind"] for n in json.loads(p.read_text())["nodes"]]
        assert "relay" not in kinds
    assert len(list((tmp_path / "dumps" / "custom").glob("*_plan.json"))) == 2


@pytest.mark.parametrize("argv", [
    ["run", "--family", "nowhere"],
    ["run", "--planners", "magic"],
    ["run", "--family", "small_dense", "--trials", "0"],
    ["run", "--family", "small_dense", "--capacity", "0"],
    ["dump", "--planner", "vcst", "--family", "custom", "--width", "2", "--height", "2", "--goals", "50"],
    ["frobnicate"],
])
def test_config_errors_exit_2(argv, tmp_path):
    assert main(argv + ([] if argv[0] == "frobnicate" else ["--out", str(tmp_path)])) == 2


def test_validation_failure_exits_1(tmp_path, monkeypatch, capsys):
    import vcst_rcp.experiment as ex

    real = ex.run_planner

    def broken(name, sc, lam=None):
        plan, trunk = real(name, sc, lam)
        plan.timelines[0].actions[0].end += 1.0
        return plan, trunk

    monkeypatch.setattr(ex, "run_planner", broken)
    assert main(["run", "--family", "small_dense", "--trials", "1", "--out", str(tmp_path)]) == 1
    assert "ContinuityViolation" in capsys.readouterr().err


def test_sign_test_extremes():
    wins, n, p = sign_test([1.0] * 100, [2.0] * 100)
    assert (wins, n) == (100, 100)
    assert p == pytest.approx(2 * 0.5 ** 100)
    assert p < 1e-29
    assert sign_test([1, 2], [1, 2]) == (0, 0, 1.0)


def test_summary_pairs_by_seed():
    rows = [{"family": "f", "planner": p, "seed": s, "distance_km": d, "pkgs_per_km": 8 / d,
             "makespan_min": 1.0, "active_makespan_min": 1.0, "wait_time_s": 0.0}
            for s in range(3) for p, d in (("vcst", 1.0 + s), ("hungarian", 2.0 + s))]
    c = summarize(rows)["f"]["vs_vcst"]["hungarian"]
    assert (c["distance_wins"], c["pairs"], c["efficiency_wins"]) == (3, 3, 3)


def test_console_script_help():
    r = subprocess.run([sys.executable, "-m", "vcst_rcp.cli", "run", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "--lambda-svc" in r.stdout
