import numpy as np
import pytest

from vcst_rcp.errors import SeparationInfeasible
from vcst_rcp.geometry import dist
from vcst_rcp.model import Scenario
from vcst_rcp.scenarios import BENCHMARK_FAMILIES, Family, ScenarioSpec, generate, preset


def test_same_seed_same_scenario():
    a = generate(preset("medium_balanced", 9))
    b = generate(preset("medium_balanced", 9))
    assert a.to_json() == b.to_json()
    assert generate(preset("medium_balanced", 10)).to_json() != a.to_json()


def test_small_dense_preset():
    sc = generate(preset(Family.SMALL_DENSE, 0))
    assert (sc.n_goals, len(sc.robots)) == (8, 3)
    pts = [sc.source, *sc.goals, *(r.pos for r in sc.robots)]
    assert all(0 < x < 100 and 0 < y < 100 for x, y in pts)
    assert all(r.capacity == 4 and r.speed == 5.0 for r in sc.robots)
    assert sc.t_service == 5.0


@pytest.mark.parametrize("fam", BENCHMARK_FAMILIES)
def test_family_ranges(fam):
    spec = preset(fam, 0)
    for seed in range(20):
        sc = generate(preset(fam, seed))
        lo, hi = spec.n_goals if isinstance(spec.n_goals, tuple) else (spec.n_goals, spec.n_goals)
        assert lo <= sc.n_goals <= hi
        lo, hi = spec.n_robots if isinstance(spec.n_robots, tuple) else (spec.n_robots, spec.n_robots)
        assert lo <= len(sc.robots) <= hi
        pts = [sc.source, *sc.goals, *(r.pos for r in sc.robots)]
        assert min(dist(p, q) for i, p in enumerate(pts) for q in pts[i + 1:]) >= 1.0


def test_capacity_families():
    assert generate(preset("high_capacity", 0)).capacity == 6
    assert generate(preset("low_capacity", 0)).capacity == 2
    wh = generate(preset("large_warehouse", 0))
    assert wh.source == (150.0, 150.0)


def test_uniform_mean():
    pts = []
    for seed in range(40):
        sc = generate(ScenarioSpec(Family.CUSTOM, 100, 100, n_goals=249, n_robots=0, seed=seed))
        pts += [sc.source, *sc.goals]
    pts = np.array(pts)
    assert len(pts) == 10_000
    sigma = 100 / np.sqrt(12) / np.sqrt(len(pts))
    assert np.all(np.abs(pts.mean(axis=0) - 50) < 3 * sigma)


def test_overcrowded_workspace_rejected():
    with pytest.raises(SeparationInfeasible):
        generate(ScenarioSpec(Family.CUSTOM, 2, 2, n_goals=10, n_robots=2))


def test_json_round_trip():
    sc = generate(preset("large_distribution", 2))
    assert Scenario.from_json(sc.to_json()).to_json() == sc.to_json()
