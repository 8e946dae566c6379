"""Relay trunk construction: metric-closure/MST Steiner heuristic plus demand routing.

The trunk is a tree over the source, all goals and any relay candidates that
pay for themselves, oriented away from the source. Its cost is the sum of
the directed edge costs ``c(parent, child)``; since every non-source node has
exactly one parent this equals ``length / speed + service_weight * (#nodes - 1)``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DisconnectedGraph, GoalNotInTrunk, InstanceTooLarge
from .transport_graph import NodeKind, TransportGraph, shortest_path


@dataclass
class RelayTrunk:
    graph: TransportGraph
    parent: dict[int, int | None]
    flow: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def nodes(self) -> list[int]:
        return sorted(self.parent)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted((p, v) for v, p in self.parent.items() if p is not None)

    @property
    def total_cost(self) -> float:
        return float(sum(self.graph.cost_matrix[u, w] for u, w in self.edges))

    @property
    def length(self) -> float:
        return float(sum(self.graph.dist[u, w] for u, w in self.edges))

    def kind(self, v: int) -> NodeKind:
        return self.graph.nodes[v].kind

    @property
    def relay_nodes(self) -> list[int]:
        return [v for v in self.nodes if self.kind(v) == NodeKind.RELAY]

    @property
    def goal_nodes(self) -> list[int]:
        return [v for v in self.nodes if self.kind(v) == NodeKind.GOAL]

    def children(self, v: int) -> list[int]:
        return sorted(c for c, p in self.parent.items() if p == v)

    def path_from_source(self, v: int) -> list[int]:
        path = [v]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        return path[::-1]

    def preorder(self) -> list[int]:
        kids: dict[int, list[int]] = {v: [] for v in self.parent}
        for v, p in self.parent.items():
            if p is not None:
                kids[p].append(v)
        order, stack = [], [self.graph.source]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(sorted(kids[v], reverse=True))
        return order

    def inflow(self, v: int) -> int:
        return sum(f for (a, b), f in self.flow.items() if b == v)

    def outflow(self, v: int) -> int:
        return sum(f for (a, b), f in self.flow.items() if a == v)

    def to_json(self) -> dict:
        g = self.graph
        return {
            "speed": g.speed,
            "service_weight": g.service_weight,
            "total_cost": self.total_cost,
            "nodes": [{"id": v, "kind": g.nodes[v].kind.value, "ref": g.nodes[v].ref,
                       "pos": list(g.nodes[v].pos)} for v in self.nodes],
            "edges": [{"from": u, "to": w, "flow": self.flow.get((u, w), 0)} for u, w in self.edges],
        }


def closure_matrix(g: TransportGraph) -> np.ndarray:
    """All-pairs shortest-path cost with service charged only at interior nodes.

    This is symmetric, so it can drive an undirected MST; the arrival charge of
    each non-source tree node is added back separately.
    """
    rho = g.service_weight * g.serviced
    half = 0.5 * (rho[:, None] + rho[None, :])
    W = np.where(np.isfinite(g.cost_matrix), g.dist / g.speed + half, np.inf)
    np.fill_diagonal(W, 0.0)
    for k in range(g.n):
        W = np.minimum(W, W[:, k:k + 1] + W[k:k + 1, :])
    K = W - half
    np.fill_diagonal(K, 0.0)
    return K


def _prim(K: np.ndarray, idx: list[int]) -> tuple[float, np.ndarray]:
    """MST weight and parent array (positions into idx) over the sub-matrix K[idx, idx]."""
    sub = K[np.ix_(idx, idx)]
    n = len(idx)
    in_tree = np.zeros(n, dtype=bool)
    best = sub[0].copy()
    par = np.zeros(n, dtype=int)
    in_tree[0] = True
    par[0] = -1
    total = 0.0
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        j = int(np.argmin(cand))
        if not np.isfinite(cand[j]):
            return np.inf, par
        total += cand[j]
        in_tree[j] = True
        upd = (sub[j] < best) & ~in_tree
        best[upd] = sub[j][upd]
        par[upd] = j
    return total, par


def kruskal(weights: dict[tuple[int, int], float], nodes: list[int]) -> list[tuple[int, int]]:
    """MST edges; ties break on the lexicographic (u, w) order with u < w."""
    root = {v: v for v in nodes}

    def find(v):
        while root[v] != v:
            root[v] = root[root[v]]
            v = root[v]
        return v

    out = []
    for (u, w), c in sorted(weights.items(), key=lambda e: (e[1], e[0])):
        if not np.isfinite(c):
            continue
        ru, rw = find(u), find(w)
        if ru != rw:
            root[ru] = rw
            out.append((u, w))
    return out


def _score(K: np.ndarray, rho: np.ndarray, X: list[int]) -> tuple[float, np.ndarray]:
    w, par = _prim(K, X)
    return w + float(rho[X].sum()), par


def _refine_with_relays(g: TransportGraph, K: np.ndarray, X: list[int]) -> list[int]:
    """Iterated 1-Steiner: add the relay that most lowers the tree cost, drop relays of degree <= 2."""
    rho = g.service_weight * g.serviced
    X = sorted(X)
    best, _ = _score(K, rho, X)
    pool = [r for r in g.relays if r not in X]
    while pool:
        gain, pick = 0.0, None
        for r in pool:
            s, _ = _score(K, rho, X + [r])
            if best - s > max(gain, 1e-12 * max(1.0, best)):
                gain, pick = best - s, r
        if pick is None:
            break
        X = sorted(X + [pick])
        pool.remove(pick)
        best -= gain
        changed = True
        while changed:
            changed = False
            _, par = _score(K, rho, X)
            deg = np.bincount(par[par >= 0], minlength=len(X)) + (par >= 0)
            for pos, v in enumerate(X):
                if g.is_relay[v] and deg[pos] <= 2:
                    Y = [x for x in X if x != v]
                    s, _ = _score(K, rho, Y)
                    if s <= best + 1e-12 * max(1.0, best):
                        X, best, changed = Y, s, True
                        break
    return X


def build_trunk(g: TransportGraph, refine: bool = True) -> RelayTrunk:
    """Metric-closure/MST trunk, optionally improved by relay insertion.

    With ``refine=False`` this is the plain heuristic: MST over the terminal
    closure, each edge expanded to its shortest path, union repaired to a tree.
    On a complete geometric graph that never routes through a relay, so
    ``refine=True`` (the default) additionally tries each relay candidate as
    a Steiner point and keeps those that lower the tree cost.
    """
    terminals = g.terminals
    if not g.goals:
        raise GoalNotInTrunk("graph has no goals")
    K = closure_matrix(g)
    if not np.all(np.isfinite(K[np.ix_(terminals, terminals)])):
        raise DisconnectedGraph("some terminals are unreachable from the source")

    X = _refine_with_relays(g, K, terminals) if refine else list(terminals)
    mst = kruskal({(u, w): K[u, w] for u, w in combinations(sorted(X), 2)}, sorted(X))

    union: set[tuple[int, int]] = set()
    for a, b in mst:
        path, _ = shortest_path(g, a, b)
        union.update((min(x, y), max(x, y)) for x, y in zip(path, path[1:]))
    nodes = sorted({v for e in union for v in e} | set(terminals))
    sym = lambda u, w: 0.5 * (g.cost_matrix[u, w] + g.cost_matrix[w, u])
    edges = set(kruskal({e: sym(*e) for e in union}, nodes))  # drops the costliest edge of any cycle

    keep = set(terminals)
    adj = _adjacency(edges)
    while True:
        leaves = [v for v, nb in adj.items() if len(nb) == 1 and v not in keep]
        if not leaves:
            break
        for v in leaves:
            for u in adj.pop(v):
                adj[u].discard(v)
    if refine:
        _shortcut_relays(g, adj, keep)
    return _orient(g, adj)


def _adjacency(edges) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {}
    for u, w in edges:
        adj.setdefault(u, set()).add(w)
        adj.setdefault(w, set()).add(u)
    return adj


def _shortcut_relays(g: TransportGraph, adj: dict[int, set[int]], keep: set[int]) -> None:
    for v in sorted(adj):
        nb = adj.get(v, set())
        if v in keep or len(nb) != 2:
            continue
        a, b = sorted(nb)
        via = g.cost_matrix[a, v] + g.cost_matrix[v, b]
        if g.has_edge(a, b) and g.cost_matrix[a, b] <= via:
            adj[a].discard(v)
            adj[b].discard(v)
            adj[a].add(b)
            adj[b].add(a)
            del adj[v]


def _orient(g: TransportGraph, adj: dict[int, set[int]]) -> RelayTrunk:
    s = g.source
    parent: dict[int, int | None] = {s: None}
    q = deque([s])
    while q:
        u = q.popleft()
        for w in sorted(adj.get(u, ())):
            if w not in parent:
                parent[w] = u
                q.append(w)
    missing = [t for t in g.terminals if t not in parent]
    if missing:
        raise DisconnectedGraph(f"terminals {missing} not connected to the source")
    return RelayTrunk(graph=g, parent=parent)


def route_demands(trunk: RelayTrunk) -> RelayTrunk:
    """Push one unit from the source to every goal along its tree path; resets previous flows."""
    flow: dict[tuple[int, int], int] = {e: 0 for e in trunk.edges}
    for goal in trunk.graph.goals:
        if goal not in trunk.parent:
            raise GoalNotInTrunk(f"goal node {goal} is not in the trunk")
        path = trunk.path_from_source(goal)
        for e in zip(path, path[1:]):
            flow[e] += 1
    trunk.flow = flow
    return trunk


def plan_trunk(g: TransportGraph, refine: bool = True) -> RelayTrunk:
    return route_demands(build_trunk(g, refine=refine))


@dataclass
class ExactSteinerTree:
    cost: float
    edges: set[tuple[int, int]]  # directed, oriented away from the source

    @property
    def nodes(self) -> set[int]:
        return {v for e in self.edges for v in e}


def _directed_apsp(g: TransportGraph) -> tuple[np.ndarray, np.ndarray]:
    D = np.array(g.cost_matrix, dtype=float)
    n = g.n
    nxt = np.tile(np.arange(n), (n, 1))
    for k in range(n):
        via = D[:, k:k + 1] + D[k:k + 1, :]
        better = via < D
        D = np.where(better, via, D)
        nxt = np.where(better, nxt[:, k:k + 1], nxt)
    return D, nxt


def exact_steiner(g: TransportGraph, max_nodes: int = 15, max_terminals: int = 8) -> ExactSteinerTree:
    """Minimum-cost Steiner arborescence rooted at the source (Dreyfus-Wagner).

    Directed costs make the service charge land exactly once per non-source
    node, matching how trunk cost is measured. Meant as a test oracle.
    """
    goals = g.goals
    if g.n > max_nodes or len(goals) + 1 > max_terminals:
        raise InstanceTooLarge(f"{g.n} nodes / {len(goals) + 1} terminals exceeds "
                               f"{max_nodes} / {max_terminals}")
    D, nxt = _directed_apsp(g)
    k, n = len(goals), g.n
    full = (1 << k) - 1
    dp = np.full((full + 1, n), np.inf)
    merge_at = np.full((full + 1, n), -1, dtype=int)
    split = np.zeros((full + 1, n), dtype=int)
    for i, t in enumerate(goals):
        dp[1 << i] = D[:, t]
    for mask in sorted(range(1, full + 1), key=lambda m: bin(m).count("1")):
        if mask & (mask - 1) == 0:
            continue
        tmp = np.full(n, np.inf)
        arg = np.zeros(n, dtype=int)
        sub = (mask - 1) & mask
        while sub:
            if sub < (mask ^ sub):
                val = dp[sub] + dp[mask ^ sub]
                upd = val < tmp
                tmp[upd] = val[upd]
                arg[upd] = sub
            sub = (sub - 1) & mask
        tot = D + tmp[None, :]
        u = np.argmin(tot, axis=1)
        dp[mask] = tot[np.arange(n), u]
        merge_at[mask] = u
        split[mask] = arg

    if not np.isfinite(dp[full, g.source]):
        raise DisconnectedGraph("terminals are not connected")

    edges: set[tuple[int, int]] = set()

    def add_path(a, b):
        while a != b:
            c = int(nxt[a, b])
            edges.add((a, c))
            a = c

    def rebuild(mask, v):
        if mask & (mask - 1) == 0:
            add_path(v, goals[mask.bit_length() - 1])
            return
        u = int(merge_at[mask, v])
        add_path(v, u)
        s = int(split[mask, u])
        rebuild(s, u)
        rebuild(mask ^ s, u)

    rebuild(full, g.source)
    return ExactSteinerTree(cost=float(dp[full, g.source]), edges=edges)
