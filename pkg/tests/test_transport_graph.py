import itertools

import numpy as np
import pytest

from vcst_rcp.errors import EmptyGoals, NodeNotFound
from vcst_rcp.geometry import RelayCandidate, Workspace
from vcst_rcp.transport_graph import NodeKind, build_graph, path_cost, shortest_path

from conftest import random_graph


def relay(p):
    return RelayCandidate(p, (0, 1), 0.0)


def test_edge_costs_arrival_service():
    g = build_graph((0, 0), [(100, 0)], [relay((50, 0))], 5.0, 5.0)
    r = g.relays[0]
    assert g.cost(g.source, r) == pytest.approx(15.0)
    assert g.cost(r, g.source) == pytest.approx(10.0)
    assert g.sigma(g.source, r) == 1 and g.sigma(r, g.source) == 0
    assert g.nodes[r].kind == NodeKind.RELAY


def test_zero_lambda_is_proportional_to_distance():
    g = random_graph(np.random.default_rng(0), 5, 4, lam=0.0, speed=2.0)
    assert np.allclose(g.cost_matrix, g.dist / 2.0, rtol=0, atol=1e-12)
    for u, w in itertools.combinations(range(g.n), 2):
        _, c = shortest_path(g, u, w)
        assert c == pytest.approx(g.dist[u, w] / 2.0, abs=1e-9)


def test_asymmetry_identity_and_recompute(rng):
    g = random_graph(rng, 6, 5)
    for u in range(g.n):
        for w in range(g.n):
            if u == w:
                continue
            diff = g.cost(u, w) - g.cost(w, u)
            assert diff == pytest.approx(g.service_weight * (g.sigma(u, w) - g.sigma(w, u)), abs=1e-9)
            want = np.hypot(*np.subtract(g.nodes[u].pos, g.nodes[w].pos)) / g.speed \
                + g.service_weight * g.sigma(u, w)
            assert abs(g.cost(u, w) - want) <= 1e-12 * max(1.0, want)
            assert g.cost(u, w) > 0


def test_identity_path():
    g = random_graph(np.random.default_rng(1), 3, 2)
    assert shortest_path(g, 2, 2) == ([2], 0.0)


def test_detour_through_relay_not_taken():
    # relay sits exactly on the straight line: same distance, one extra service
    g = build_graph((0, 0), [(10, 0)], [relay((5, 0))], 1.0, 5.0)
    path, c = shortest_path(g, 0, 1)
    assert path == [0, 1] and c == pytest.approx(15.0)


def brute_force(g, u, w):
    others = [k for k in range(g.n) if k not in (u, w)]
    best = (np.inf, None)
    for r in range(len(others) + 1):
        for mid in itertools.permutations(others, r):
            p = [u, *mid, w]
            c = path_cost(g, p)
            if c < best[0] - 1e-12 or (abs(c - best[0]) <= 1e-12 and p < best[1]):
                best = (c, p)
    return best


def test_matches_exhaustive_paths_on_sparse_graphs():
    rng = np.random.default_rng(7)
    from vcst_rcp.transport_graph import TransportGraph
    for _ in range(5):
        g0 = random_graph(rng, 4, 5)  # 10 nodes
        allowed = rng.random((g0.n, g0.n)) < 0.4
        allowed = allowed | allowed.T
        for k in range(g0.n - 1):  # keep it connected
            allowed[k, k + 1] = allowed[k + 1, k] = True
        g = TransportGraph(g0.nodes, g0.speed, g0.service_weight, allowed)
        for u, w in [(0, 9), (3, 7), (8, 1)]:
            path, c = shortest_path(g, u, w)
            bc, _ = brute_force(g, u, w)
            assert c == pytest.approx(bc, abs=1e-9)
            assert path_cost(g, path) == pytest.approx(c, abs=1e-9)


def test_lexicographic_tie_break():
    # two relays give equal-cost detours around a forbidden direct edge
    from vcst_rcp.transport_graph import TransportGraph
    g0 = build_graph((0, 0), [(10, 0)], [relay((5, 5)), relay((5, -5))], 1.0, 0.0)
    allowed = np.ones((4, 4), bool)
    allowed[0, 1] = allowed[1, 0] = False
    g = TransportGraph(g0.nodes, 1.0, 0.0, allowed)
    path, _ = shortest_path(g, 0, 1)
    assert path == [0, 2, 1]


def test_errors():
    with pytest.raises(EmptyGoals):
        build_graph((0, 0), [], [], 1.0, 0.0)
    g = build_graph((0, 0), [(1, 1)], [], 1.0, 0.0)
    with pytest.raises(NodeNotFound):
        shortest_path(g, 0, 5)
    with pytest.raises(ValueError):
        build_graph((0, 0), [(1, 1)], [], 0.0, 0.0)
    with pytest.raises(ValueError):
        build_graph((0, 0), [(200, 1)], [], 1.0, 0.0, Workspace.box(100, 100))
