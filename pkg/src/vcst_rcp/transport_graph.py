"""Travel-plus-service cost graph over the source, goals and relay candidates.

Edge cost is ``|u - w| / speed + service_weight * sigma(u, w)`` where
``sigma`` charges one service event when the edge arrives at a relay or a
goal. Pickup at the source is charged by the scheduler, not here, so the
cost is asymmetric: ``c(u, w) - c(w, u) = service_weight * (sigma(u, w) - sigma(w, u))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EmptyGoals, NodeNotFound
from .geometry import Point, RelayCandidate, Workspace


class NodeKind(str, Enum):
    SOURCE = "source"
    GOAL = "goal"
    RELAY = "relay"


@dataclass(frozen=True)
class Node:
    kind: NodeKind
    ref: int  # goal id or relay candidate id; -1 for the source
    pos: Point


class TransportGraph:
    """Immutable graph; node 0 is the source, then goals, then relays.

    ``allowed`` restricts the edge set (symmetric boolean matrix). By default
    the graph is complete, which is exact for a convex obstacle-free workspace.
    """

    def __init__(self, nodes: list[Node], speed: float, service_weight: float,
                 allowed: np.ndarray | None = None):
        if speed <= 0:
            raise ValueError("speed must be positive")
        if service_weight < 0:
            raise ValueError("service weight must be non-negative")
        kinds = [n.kind for n in nodes]
        if kinds.count(NodeKind.SOURCE) != 1 or kinds[0] != NodeKind.SOURCE:
            raise ValueError("exactly one source node, stored first")
        self.nodes = list(nodes)
        self.speed = float(speed)
        self.service_weight = float(service_weight)

        pos = np.array([n.pos for n in nodes], dtype=float)
        diff = pos[:, None, :] - pos[None, :, :]
        self.dist = np.hypot(diff[..., 0], diff[..., 1])
        self.serviced = np.array([k != NodeKind.SOURCE for k in kinds])
        self.is_relay = np.array([k == NodeKind.RELAY for k in kinds])
        cost = self.dist / self.speed + self.service_weight * self.serviced[None, :]
        if allowed is None:
            allowed = np.ones_like(cost, dtype=bool)
        allowed = np.asarray(allowed, dtype=bool) & np.asarray(allowed, dtype=bool).T
        cost = np.where(allowed, cost, np.inf)
        np.fill_diagonal(cost, 0.0)
        cost.setflags(write=False)
        self.cost_matrix = cost
        self.dist.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def source(self) -> int:
        return 0

    @property
    def goals(self) -> list[int]:
        return [i for i, nd in enumerate(self.nodes) if nd.kind == NodeKind.GOAL]

    @property
    def relays(self) -> list[int]:
        return [i for i, nd in enumerate(self.nodes) if nd.kind == NodeKind.RELAY]

    @property
    def terminals(self) -> list[int]:
        return [0] + self.goals

    def sigma(self, u: int, w: int) -> int:
        return int(self.serviced[w]) if u != w else 0

    def cost(self, u: int, w: int) -> float:
        return float(self.cost_matrix[u, w])

    def has_edge(self, u: int, w: int) -> bool:
        return u != w and np.isfinite(self.cost_matrix[u, w])

    def check(self, u: int) -> None:
        if not (isinstance(u, (int, np.integer)) and 0 <= u < self.n):
            raise NodeNotFound(f"node {u!r} not in graph of {self.n} nodes")


def build_graph(source: Point, goals: list[Point], relays: list[RelayCandidate], v_speed: float,
                service_weight: float, workspace: Workspace | None = None) -> TransportGraph:
    if not goals:
        raise EmptyGoals("the graph needs at least one goal")
    nodes = [Node(NodeKind.SOURCE, -1, tuple(map(float, source)))]
    nodes += [Node(NodeKind.GOAL, k, tuple(map(float, g))) for k, g in enumerate(goals)]
    nodes += [Node(NodeKind.RELAY, k, r.position) for k, r in enumerate(relays)]
    if workspace is not None:
        for nd in nodes:
            if not workspace.contains(nd.pos):
                raise ValueError(f"{nd.kind.value} node at {nd.pos} lies outside the workspace")
    return TransportGraph(nodes, v_speed, service_weight)


def shortest_path(g: TransportGraph, u: int, w: int) -> tuple[list[int], float]:
    """Minimum-cost path; equal-cost paths resolve to the lexicographically smallest id sequence."""
    g.check(u)
    g.check(w)
    if u == w:
        return [u], 0.0
    n = g.n
    d = np.full(n, np.inf)
    d[u] = 0.0
    paths: list[tuple[int, ...] | None] = [None] * n
    paths[u] = (u,)
    done = np.zeros(n, dtype=bool)
    C = g.cost_matrix
    while True:
        masked = np.where(done, np.inf, d)
        best = masked.min()
        if not np.isfinite(best):
            break
        # among equal-cost frontier nodes settle the lexicographically smallest path first
        ties = np.flatnonzero(masked == best)
        x = min(ties, key=lambda k: paths[k]) if len(ties) > 1 else int(ties[0])
        x = int(x)
        done[x] = True
        if x == w:
            break
        cand = d[x] + C[x]
        px = paths[x]
        better = np.flatnonzero((cand < d) & ~done)
        for k in better:
            d[k] = cand[k]
            paths[k] = px + (int(k),)
        for k in np.flatnonzero((cand == d) & ~done & np.isfinite(cand)):
            alt = px + (int(k),)
            if alt < paths[k]:
                paths[k] = alt
    if paths[w] is None:
        return [], float("inf")
    return list(paths[w]), float(d[w])


def path_cost(g: TransportGraph, path: list[int]) -> float:
    return float(sum(g.cost_matrix[a, b] for a, b in zip(path, path[1:])))
