"""Paired-seed experiment sweeps, statistics, and artifact dumps."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from .baselines import plan_cvrp, plan_hungarian
from .coordination import plan_vcst
from .geometry import compute_voronoi, relay_candidates
from .model import Plan, Scenario
from .scenarios import Family, ScenarioSpec, generate, preset
from .simulation import Violation, compute_metrics, validate
from .steiner_trunk import RelayTrunk, plan_trunk
from .transport_graph import build_graph

PLANNERS = ("vcst", "hungarian", "cvrp")
CSV_COLUMNS = ["family", "planner", "seed", "distance_km", "pkgs_per_km", "makespan_min",
               "active_makespan_min", "n_relays_used", "n_waits", "wait_time_s"]


class ValidationFailed(Exception):
    def __init__(self, family: str, planner: str, seed: int, violations: list[Violation]):
        self.family, self.planner, self.seed, self.violations = family, planner, seed, violations
        super().__init__(f"{planner} plan for {family} seed {seed} has {len(violations)} violations")


@dataclass
class ExperimentConfig:
    families: list[str]
    planners: list[str] = field(default_factory=lambda: list(PLANNERS))
    trials: int = 100
    seed_base: int = 0
    lambda_svc: float | None = None  # None: use the scenario service time
    capacity: int | None = None
    out: Path | None = None
    dump_trunk: bool = False
    dump_plan: bool = False
    jobs: int = 1
    custom: dict = field(default_factory=dict)  # ScenarioSpec overrides for the custom family

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.planners:
            raise ValueError("at least one planner is required")
        bad = [p for p in self.planners if p not in PLANNERS]
        if bad:
            raise ValueError(f"unknown planners {bad}; choose from {PLANNERS}")
        self.families = [Family(f).value for f in self.families]
        if not self.families:
            raise ValueError("at least one family is required")
        if self.capacity is not None and self.capacity < 1:
            raise ValueError("capacity must be >= 1")


def scenario_spec(family: str, seed: int, capacity: int | None = None, **custom) -> ScenarioSpec:
    fam = Family(family)
    over = {} if capacity is None else {"capacity": capacity}
    if fam == Family.CUSTOM:
        base = dict(family=fam, width=100.0, height=100.0, n_goals=8, n_robots=3)
        base.update(custom)
        base.update(over)
        return ScenarioSpec(seed=seed, **base)
    return preset(fam, seed=seed, **over)


def run_planner(name: str, scenario: Scenario, lambda_svc: float | None = None) -> tuple[Plan, RelayTrunk | None]:
    if name == "vcst":
        return plan_vcst(scenario, service_weight=lambda_svc, return_trunk=True)
    if name == "hungarian":
        return plan_hungarian(scenario), None
    if name == "cvrp":
        return plan_cvrp(scenario), None
    raise ValueError(f"unknown planner {name!r}")


def _trial(args) -> list[dict]:
    cfg, family, seed = args
    sc = generate(scenario_spec(family, seed, cfg.capacity, **cfg.custom))
    rows = []
    for name in cfg.planners:
        plan, trunk = run_planner(name, sc, cfg.lambda_svc)
        bad = validate(plan, sc)
        if bad:
            raise ValidationFailed(family, name, seed, bad)
        m = compute_metrics(plan, sc)
        rows.append({
            "family": family, "planner": name, "seed": seed,
            "distance_km": m.total_distance, "pkgs_per_km": m.packages_per_km,
            "makespan_min": m.makespan, "active_makespan_min": m.active_makespan,
            "n_relays_used": plan.n_relays_used, "n_waits": m.n_waits, "wait_time_s": m.wait_time,
        })
        if cfg.out is not None and (cfg.dump_trunk or cfg.dump_plan):
            d = Path(cfg.out) / "dumps" / family
            d.mkdir(parents=True, exist_ok=True)
            if cfg.dump_plan:
                _write_json(d / f"{name}_{seed}_plan.json", plan.to_json())
            if cfg.dump_trunk and trunk is not None:
                _write_json(d / f"{name}_{seed}_trunk.json", trunk.to_json())
    return rows


def run_experiment(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """All (family, trial) pairs; trial i uses seed ``seed_base + i`` for every planner."""
    work = [(cfg, fam, cfg.seed_base + i) for fam in cfg.families for i in range(cfg.trials)]
    if cfg.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(cfg.jobs) as ex:
            chunks = list(ex.map(_trial, work, chunksize=8))
    else:
        chunks = [_trial(w) for w in work]
    rows = sorted((r for c in chunks for r in c), key=lambda r: (r["family"], r["planner"], r["seed"]))
    return rows, summarize(rows)


def sign_test(a, b) -> tuple[int, int, float]:
    """Two-sided sign test on paired samples: (#a<b, #non-tied pairs, p-value)."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    wins = int(np.sum(a < b))
    n = int(np.sum(a != b))
    p = 1.0 if n == 0 else float(binomtest(wins, n, 0.5, alternative="two-sided").pvalue)
    return wins, n, p


def summarize(rows: list[dict]) -> dict:
    out: dict = {}
    metrics = ["distance_km", "pkgs_per_km", "makespan_min", "active_makespan_min", "wait_time_s"]
    for fam in sorted({r["family"] for r in rows}):
        fam_rows = [r for r in rows if r["family"] == fam]
        by_planner = {}
        for p in sorted({r["planner"] for r in fam_rows}):
            pr = sorted((r for r in fam_rows if r["planner"] == p), key=lambda r: r["seed"])
            by_planner[p] = pr
        entry: dict = {"planners": {}, "vs_vcst": {}}
        for p, pr in by_planner.items():
            entry["planners"][p] = {
                m: {"mean": float(np.mean([r[m] for r in pr])), "std": float(np.std([r[m] for r in pr]))}
                for m in metrics
            }
            entry["planners"][p]["trials"] = len(pr)
        if "vcst" in by_planner:
            v = by_planner["vcst"]
            for p, pr in by_planner.items():
                if p == "vcst":
                    continue
                seeds = {r["seed"] for r in v} & {r["seed"] for r in pr}
                dv = [r["distance_km"] for r in v if r["seed"] in seeds]
                db = [r["distance_km"] for r in pr if r["seed"] in seeds]
                ev = [r["pkgs_per_km"] for r in v if r["seed"] in seeds]
                eb = [r["pkgs_per_km"] for r in pr if r["seed"] in seeds]
                wins, n, pval = sign_test(dv, db)
                ewins, en, epval = sign_test(eb, ev)
                entry["vs_vcst"][p] = {
                    "distance_wins": wins, "pairs": n, "distance_p": pval,
                    "distance_saving": 1.0 - float(np.mean(dv)) / float(np.mean(db)),
                    "efficiency_wins": ewins, "efficiency_p": epval,
                }
        out[fam] = entry
    return out


def _fmt(v) -> str:
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def results_csv(rows: list[dict], timestamp: str | None = None) -> str:
    """CSV text; the first line is a ``#`` timestamp comment, everything after is deterministic."""
    buf = io.StringIO()
    ts = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    buf.write(f"# generated {ts}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def read_results_csv(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    ints = {"seed", "n_relays_used", "n_waits"}
    conv = lambda k, v: v if k in ("family", "planner") else int(v) if k in ints else float(v)
    return [{k: conv(k, v) for k, v in r.items()} for r in csv.DictReader(lines)]


def format_summary(summary: dict) -> str:
    lines = [f"{'family':<20} {'planner':<10} {'dist km':>14} {'pkgs/km':>12} {'makespan min':>14} {'active min':>12}"]
    for fam, e in summary.items():
        for p, s in e["planners"].items():
            lines.append(f"{fam:<20} {p:<10} "
                         f"{s['distance_km']['mean']:>7.3f}±{s['distance_km']['std']:<6.3f} "
                         f"{s['pkgs_per_km']['mean']:>6.2f}±{s['pkgs_per_km']['std']:<5.2f} "
                         f"{s['makespan_min']['mean']:>7.2f}±{s['makespan_min']['std']:<6.2f} "
                         f"{s['active_makespan_min']['mean']:>12.2f}")
        for p, c in e["vs_vcst"].items():
            lines.append(f"{'':<20} vcst vs {p}: distance lower in {c['distance_wins']}/{c['pairs']} "
                         f"(sign test p={c['distance_p']:.3g}), mean saving {100 * c['distance_saving']:.1f}%")
    return "\n".join(lines)


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=1, sort_keys=True), encoding="utf-8")


def write_outputs(out: Path, rows: list[dict], summary: dict) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(results_csv(rows), encoding="utf-8")
    _write_json(out / "summary.json", summary)


def overlay_svg(scenario: Scenario, plan: Plan, trunk: RelayTrunk | None) -> str:
    """Voronoi cells, trunk edges and robot tours drawn in workspace coordinates."""
    ws = scenario.workspace
    W, H = ws.width, ws.height
    x0, y0 = ws.min_corner
    f = lambda p: (p[0] - x0, H - (p[1] - y0))  # flip y so north is up
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:g}" height="{H:g}" viewBox="0 0 {W:g} {H:g}">',
           f'<rect x="0" y="0" width="{W:g}" height="{H:g}" fill="white" stroke="black"/>']
    cells = compute_voronoi([r.pos for r in scenario.robots], ws)
    for c in cells:
        pts = " ".join(f"{x:.3f},{y:.3f}" for x, y in map(f, c.polygon))
        out.append(f'<polygon points="{pts}" fill="none" stroke="#bbbbbb" stroke-dasharray="2,2"/>')
    if trunk is not None:
        for u, w in trunk.edges:
            (ax, ay), (bx, by) = f(trunk.graph.nodes[u].pos), f(trunk.graph.nodes[w].pos)
            out.append(f'<line x1="{ax:.3f}" y1="{ay:.3f}" x2="{bx:.3f}" y2="{by:.3f}" '
                       f'stroke="#1f77b4" stroke-width="{1 + trunk.flow.get((u, w), 0) * 0.3:.2f}"/>')
    palette = ["#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]
    for k, tl in enumerate(plan.timelines):
        legs = [a for a in tl.actions if a.kind == "travel"]
        if not legs:
            continue
        pts = [f(legs[0].src)] + [f(a.dst) for a in legs]
        s = " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)
        out.append(f'<polyline points="{s}" fill="none" stroke="{palette[k % len(palette)]}" '
                   f'stroke-opacity="0.7"/>')
    for gid, g in enumerate(scenario.goals):
        x, y = f(g)
        out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="2" fill="green"><title>goal {gid}</title></circle>')
    for v, p in sorted(plan.relays.items()):
        x, y = f(p)
        out.append(f'<polygon points="{x:.3f},{y - 3:.3f} {x + 3:.3f},{y:.3f} {x:.3f},{y + 3:.3f} '
                   f'{x - 3:.3f},{y:.3f}" fill="orange"><title>relay {v}</title></polygon>')
    for r in scenario.robots:
        x, y = f(r.pos)
        out.append(f'<rect x="{x - 2:.3f}" y="{y - 2:.3f}" width="4" height="4" fill="black">'
                   f'<title>robot {r.id}</title></rect>')
    x, y = f(scenario.source)
    out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="4" fill="blue"><title>source</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def vcst_trunk(scenario: Scenario, lambda_svc: float | None = None) -> RelayTrunk:
    lam = scenario.t_service if lambda_svc is None else lambda_svc
    cells = compute_voronoi([r.pos for r in scenario.robots], scenario.workspace)
    g = build_graph(scenario.source, scenario.goals, relay_candidates(cells), scenario.speed, lam,
                    scenario.workspace)
    return plan_trunk(g)


def dump_artifacts(scenario: Scenario, planner: str, out: Path,
                   lambda_svc: float | None = None) -> dict[str, Path]:
    """Scenario, trunk, plan and SVG overlay for one trial.

    The trunk file always holds the relay trunk for the scenario, whichever
    planner produced the plan.
    """
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out}: {e}") from e
    plan, trunk = run_planner(planner, scenario, lambda_svc)
    bad = validate(plan, scenario)
    if bad:
        raise ValidationFailed(scenario.family, planner, scenario.seed, bad)
    if trunk is None:
        trunk = vcst_trunk(scenario, lambda_svc)
    paths = {
        "scenario": out / "scenario.json",
        "trunk": out / "trunk.json",
        "plan": out / "plan.json",
        "svg": out / "overlay.svg",
    }
    _write_json(paths["scenario"], scenario.to_json())
    _write_json(paths["trunk"], trunk.to_json())
    _write_json(paths["plan"], plan.to_json())
    paths["svg"].write_text(overlay_svg(scenario, plan, trunk if planner == "vcst" else None), encoding="utf-8")
    return paths
