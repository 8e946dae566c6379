"""Command-line entry point.

Exit codes: 0 all plans valid, 1 a plan failed validation, 2 bad configuration.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import PlanningError
from .experiment import (PLANNERS, ExperimentConfig, ValidationFailed, dump_artifacts, format_summary,
                         run_experiment, scenario_spec, write_outputs)
from .model import Scenario
from .scenarios import Family, BENCHMARK_FAMILIES, generate

EXIT_OK, EXIT_INVALID, EXIT_CONFIG = 0, 1, 2


def _families(text: str) -> list[str]:
    if text == "all":
        return [f.value for f in BENCHMARK_FAMILIES]
    names = [t.strip() for t in text.split(",") if t.strip()]
    for n in names:
        Family(n)
    return names


def _planners(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    bad = [n for n in names if n not in PLANNERS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown planner(s) {bad}")
    return names


def _custom(args) -> dict:
    over = {}
    for key, attr in (("width", "width"), ("height", "height"), ("n_goals", "goals"),
                      ("n_robots", "robots"), ("v_speed", "speed"), ("t_service", "t_service")):
        val = getattr(args, attr, None)
        if val is not None:
            over[key] = val
    if args.source_center:
        over["source_center"] = True
    return over


def _report(e: ValidationFailed) -> int:
    print(f"validation failed: {e}", file=sys.stderr)
    for v in e.violations:
        print(f"  {v}", file=sys.stderr)
    return EXIT_INVALID


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--capacity", type=int, help="override robot capacity C")
    p.add_argument("--lambda-svc", type=float, default=None,
                   help="service weight in the trunk edge cost, seconds (default: the service time)")
    g = p.add_argument_group("custom family")
    g.add_argument("--width", type=float)
    g.add_argument("--height", type=float)
    g.add_argument("--goals", type=int)
    g.add_argument("--robots", type=int)
    g.add_argument("--speed", type=float)
    g.add_argument("--t-service", type=float)
    g.add_argument("--source-center", action="store_true", help="pin the source to the workspace centre")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vcst-rcp", description="Relay-trunk delivery planning benchmarks")
    sub = ap.add_subparsers(dest="cmd", required=True)

    run = sub.add_parser("run", help="paired multi-seed sweep over scenario families and planners")
    run.add_argument("--family", type=_families, default=_families("all"),
                     help="comma-separated families or 'all'")
    run.add_argument("--planners", type=_planners, default=list(PLANNERS))
    run.add_argument("--trials", type=int, default=100)
    run.add_argument("--seed", type=int, default=0, help="seed of trial 0; trial i uses seed + i")
    run.add_argument("--out", type=Path, default=Path("results"))
    run.add_argument("--dump-trunk", action="store_true", help="write every VCST trunk as JSON")
    run.add_argument("--dump-plan", action="store_true", help="write every plan as JSON")
    run.add_argument("--jobs", type=int, default=1)
    _add_scenario_flags(run)

    dump = sub.add_parser("dump", help="scenario, trunk, plan and SVG overlay for one trial")
    dump.add_argument("--family", default="small_dense", type=lambda s: Family(s).value)
    dump.add_argument("--planner", default="vcst", choices=PLANNERS)
    dump.add_argument("--seed", type=int, default=0)
    dump.add_argument("--scenario", type=Path, help="load the scenario from JSON instead of generating it")
    dump.add_argument("--out", type=Path, default=Path("dump"))
    _add_scenario_flags(dump)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK

    if args.cmd == "run":
        try:
            cfg = ExperimentConfig(families=args.family, planners=args.planners, trials=args.trials,
                                   seed_base=args.seed, lambda_svc=args.lambda_svc, capacity=args.capacity,
                                   out=args.out, dump_trunk=args.dump_trunk, dump_plan=args.dump_plan,
                                   jobs=args.jobs, custom=_custom(args))
            rows, summary = run_experiment(cfg)
        except ValidationFailed as e:
            return _report(e)
        except (ValueError, PlanningError) as e:
            print(f"configuration error: {e}", file=sys.stderr)
            return EXIT_CONFIG
        write_outputs(cfg.out, rows, summary)
        print(format_summary(summary))
        print(f"\nwrote {len(rows)} rows to {cfg.out / 'results.csv'}")
        return EXIT_OK

    try:
        if args.scenario is not None:
            sc = Scenario.from_json(json.loads(args.scenario.read_text(encoding="utf-8")))
        else:
            sc = generate(scenario_spec(args.family, args.seed, args.capacity, **_custom(args)))
        paths = dump_artifacts(sc, args.planner, args.out, args.lambda_svc)
    except ValidationFailed as e:
        return _report(e)
    except (ValueError, PlanningError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    for k, p in paths.items():
        print(f"{k}: {p}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
