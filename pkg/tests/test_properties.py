import numpy as np
from hypothesis import given, settings, strategies as st

from vcst_rcp.baselines import hungarian_assign
from vcst_rcp.coordination import plan_vcst
from vcst_rcp.geometry import Workspace, compute_voronoi, dist, relay_candidates, relay_point
from vcst_rcp.simulation import compute_metrics, validate

from conftest import make_scenario

coord = st.floats(1.0, 99.0, allow_nan=False)
point = st.tuples(coord, coord)


def spread(points, gap=1.0):
    out = []
    for p in points:
        if all(dist(p, q) >= gap for q in out):
            out.append(p)
    return out


@settings(max_examples=60, deadline=None)
@given(st.lists(point, min_size=2, max_size=9))
def test_cells_cover_box_and_relays_are_symmetric(pts):
    sites = spread(pts)
    cells = compute_voronoi(sites, Workspace.box(100, 100))
    assert abs(sum(c.area() for c in cells) - 10_000) < 1e-6
    for c in cells:
        for nid, _ in c.neighbor_edges:
            assert relay_point(c, cells[nid]) == relay_point(cells[nid], c)
    assert len(relay_candidates(cells)) <= max(1, 3 * len(sites) - 6)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 3), st.integers(0, 2**32 - 1), st.floats(0, 100))
def test_assignment_row_shift_invariant(m, extra, seed, shift):
    # every row is matched when rows <= columns, so shifting one row shifts the optimum by the same amount
    c = np.random.default_rng(seed).integers(0, 50, (m, m + extra)).astype(float)
    pairs, base = hungarian_assign(c)
    c[0] += shift
    pairs2, total = hungarian_assign(c)
    assert abs(total - base - shift) < 1e-9
    assert sum(c[i, j] for i, j in pairs) == total


@settings(max_examples=40, deadline=None)
@given(point, st.lists(point, min_size=1, max_size=10), st.lists(point, min_size=1, max_size=4),
       st.integers(1, 5), st.sampled_from([0.0, 5.0]))
def test_vcst_plans_always_validate(src, goals, robots, cap, lam):
    pts = spread([src] + goals + robots)
    src, rest = pts[0], pts[1:]
    goals = [p for p in rest if p in goals][:len(goals)]
    robots = [p for p in rest if p not in goals]
    if not goals or not robots:
        return
    sc = make_scenario(src, goals, robots, capacity=cap)
    plan = plan_vcst(sc, service_weight=lam)
    assert validate(plan, sc) == []
    m = compute_metrics(plan, sc)
    assert m.active_makespan <= m.makespan
