import itertools

import numpy as np
import pytest

from vcst_rcp.baselines import (clarke_wright, cvrp_routes, hungarian_assign, hungarian_rounds,
                                nearest_neighbor_order, plan_cvrp, plan_hungarian, route_length, two_opt)
from vcst_rcp.errors import EmptyMatrix
from vcst_rcp.geometry import dist
from vcst_rcp.scenarios import generate, preset
from vcst_rcp.simulation import validate

from conftest import make_scenario


def test_hungarian_small_examples():
    assert hungarian_assign([[1, 2], [2, 1]]) == ([(0, 0), (1, 1)], 2.0)
    assert hungarian_assign([[5]]) == ([(0, 0)], 5.0)
    with pytest.raises(EmptyMatrix):
        hungarian_assign(np.zeros((0, 0)))
    with pytest.raises(ValueError):
        hungarian_assign([[1, -1]])
    with pytest.raises(ValueError):
        hungarian_assign([[1, np.inf]])


def test_hungarian_matches_permutations_6x6():
    rng = np.random.default_rng(31)
    perms = list(itertools.permutations(range(6)))
    for _ in range(50):
        c = rng.uniform(0, 100, (6, 6))
        best = min(sum(c[i, p[i]] for i in range(6)) for p in perms)
        _, total = hungarian_assign(c)
        assert total == pytest.approx(best, abs=1e-9)


def test_hungarian_row_shift_invariance():
    rng = np.random.default_rng(32)
    for _ in range(30):
        c = rng.uniform(0, 10, (5, 7))
        pairs, _ = hungarian_assign(c)
        c2 = c.copy()
        c2[int(rng.integers(5))] += float(rng.uniform(0, 50))
        assert hungarian_assign(c2)[0] == pairs


def test_rounds_cover_every_goal_once():
    sc = generate(preset("medium_balanced", 3))
    lists = hungarian_rounds(sc)
    got = sorted(g for gl in lists.values() for g in gl)
    assert got == list(range(sc.n_goals))
    m = len(sc.robots)
    assert max(len(g) for g in lists.values()) == -(-sc.n_goals // m)


def test_nearest_neighbor_order():
    assert nearest_neighbor_order((0, 0), [(5, 0), (1, 0), (3, 0)]) == [1, 2, 0]


def test_cvrp_capacity_one_is_out_and_back():
    rng = np.random.default_rng(33)
    S = (50.0, 50.0)
    pts = [tuple(p) for p in rng.uniform(0, 100, (6, 2))]
    routes = clarke_wright(S, pts, 1)
    assert sorted(r[0] for r in routes) == list(range(6)) and all(len(r) == 1 for r in routes)
    total = sum(route_length(S, [pts[i] for i in r]) for r in routes)
    assert total == pytest.approx(2 * sum(dist(S, p) for p in pts))


def test_cvrp_merges_nearby_goals():
    routes = clarke_wright((0, 0), [(100, 0), (100, 5)], 2)
    assert len(routes) == 1 and sorted(routes[0]) == [0, 1]


def exact_cvrp(S, pts, cap):
    n = len(pts)
    best_route = {}
    for r in range(1, cap + 1):
        for sub in itertools.combinations(range(n), r):
            best_route[frozenset(sub)] = min(route_length(S, [pts[i] for i in p])
                                             for p in itertools.permutations(sub))
    memo = {}

    def solve(left):
        if not left:
            return 0.0
        if left in memo:
            return memo[left]
        first = min(left)
        rest = left - {first}
        best = np.inf
        for r in range(0, cap):
            for extra in itertools.combinations(sorted(rest), r):
                grp = frozenset((first,) + extra)
                best = min(best, best_route[grp] + solve(left - grp))
        memo[left] = best
        return best

    return solve(frozenset(range(n)))


def test_cvrp_calibration_against_exact():
    rng = np.random.default_rng(34)
    within = 0
    for _ in range(100):
        S = tuple(rng.uniform(0, 100, 2))
        pts = [tuple(p) for p in rng.uniform(0, 100, (7, 2))]
        routes = clarke_wright(S, pts, 3)
        assert sorted(i for r in routes for i in r) == list(range(7))
        assert all(len(r) <= 3 for r in routes)
        got = sum(route_length(S, [pts[i] for i in r]) for r in routes)
        opt = exact_cvrp(S, pts, 3)
        assert got >= opt - 1e-9
        assert got <= 2 * sum(dist(S, p) for p in pts) + 1e-9  # never worse than no merging
        within += got <= 1.5 * opt
    assert within >= 90


def test_two_opt_uncrosses():
    pts = [(10, 0), (10, 10), (0, 10)]
    # S=(0,0); visiting (10,10) first then (10,0) then (0,10) crosses itself
    best = two_opt((0, 0), [1, 0, 2], pts)
    assert route_length((0, 0), [pts[i] for i in best]) == pytest.approx(40.0)


def test_baseline_plans_validate():
    for fam in ("small_dense", "low_capacity", "large_distribution"):
        for seed in range(4):
            sc = generate(preset(fam, seed))
            for plan in (plan_hungarian(sc), plan_cvrp(sc)):
                assert validate(plan, sc) == [], (fam, seed, plan.planner)
                for tl in plan.timelines:
                    assert max(tl.load_trajectory(), default=0) <= sc.capacity


def test_cvrp_routes_respect_capacity():
    sc = generate(preset("high_capacity", 1))
    routes = cvrp_routes(sc)
    assert all(len(r) <= 6 for r in routes)


def test_hungarian_single_goal_plan():
    sc = make_scenario((0, 0), [(100, 0)], [(0, 0), (50, 50)])
    plan = plan_hungarian(sc)
    assert validate(plan, sc) == []
    assert [len(tl.actions) > 0 for tl in plan.timelines] == [True, False]
