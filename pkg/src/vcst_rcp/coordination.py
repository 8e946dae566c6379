"""Stage 2: turn trunk flows into per-robot timelines.

The pickup robot shuttles batches of at most ``C`` packages from the source
to the first relay on each package's trunk path (or straight to the goal when
the path has no relay). Each relay gets one receiver robot, which collects
its packages after they have been dropped and delivers them with an
MST-preorder tour, returning to the relay for another load when the relay's
demand exceeds its capacity. A relay fed by another relay is supplied by its
own receiver, who fetches the packages from the upstream relay first.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasiblePlan, NoRobots, ZeroCapacity
from .geometry import Point, compute_voronoi, dist, owner_of, relay_candidates
from .model import Plan, RelayLedger, Robot, Scenario, Timeline
from .steiner_trunk import RelayTrunk, plan_trunk
from .transport_graph import NodeKind, build_graph

WORKLOAD_WEIGHT = 1.0  # seconds of travel traded for one already-assigned package


@dataclass
class PickupTour:
    stops: list[tuple[int, int]] = field(default_factory=list)  # (trunk node, packages left there)

    @property
    def load(self) -> int:
        return sum(c for _, c in self.stops)


@dataclass
class DeliveryGroup:
    start: int  # trunk node the packages are collected from
    goals: list[int]  # trunk goal nodes in visiting order


def pickup_robot(scenario: Scenario) -> int:
    """Robot whose Voronoi cell contains the source (nearest robot, ties to lowest id)."""
    if not scenario.robots:
        raise NoRobots("scenario has no robots")
    cells = compute_voronoi([r.pos for r in scenario.robots], scenario.workspace)
    return scenario.robots[owner_of(cells, scenario.source)].id


def nearest_relay_ancestor(trunk: RelayTrunk, v: int) -> int | None:
    p = trunk.parent[v]
    while p is not None:
        if trunk.kind(p) == NodeKind.RELAY:
            return p
        p = trunk.parent[p]
    return None


def relay_depth(trunk: RelayTrunk, r: int) -> int:
    return sum(1 for v in trunk.path_from_source(r) if trunk.kind(v) == NodeKind.RELAY)


def first_stops(trunk: RelayTrunk) -> list[tuple[int, int]]:
    """Where the pickup robot leaves packages, in trunk preorder, with counts."""
    out = []
    for v in trunk.preorder():
        kind = trunk.kind(v)
        if kind == NodeKind.SOURCE or nearest_relay_ancestor(trunk, v) is not None:
            continue
        if kind == NodeKind.RELAY:
            out.append((v, trunk.inflow(v)))
        elif kind == NodeKind.GOAL:
            out.append((v, 1))
    return out


def plan_batches(trunk: RelayTrunk, capacity: int) -> list[PickupTour]:
    """Greedy fill of source departures in trunk depth-first order, splitting stops across tours."""
    if capacity < 1:
        raise ZeroCapacity("capacity must be at least 1")
    tours: list[PickupTour] = []
    room = 0
    for node, demand in first_stops(trunk):
        while demand > 0:
            if room == 0:
                tours.append(PickupTour())
                room = capacity
            k = min(room, demand)
            tours[-1].stops.append((node, k))
            room -= k
            demand -= k
    return tours


def assign_relays(trunk: RelayTrunk, robots: list[Robot], pickup_id: int,
                  workload_weight: float = WORKLOAD_WEIGHT) -> dict[int, int]:
    """Receiver per relay, chosen greedily by travel time plus weighted workload.

    Relays are taken in decreasing demand (ties by node id); each goes to the
    robot minimising ``dist / speed + workload_weight * assigned_packages``
    (ties by robot id). The pickup robot only receives when it is alone.
    """
    if not robots:
        raise NoRobots("no robots to assign relays to")
    pool = [r for r in robots if r.id != pickup_id] or [r for r in robots if r.id == pickup_id]
    if not pool:
        raise NoRobots(f"pickup robot {pickup_id} not in fleet")
    g = trunk.graph
    relays = sorted(trunk.relay_nodes, key=lambda v: (-trunk.outflow(v), v))
    load = {r.id: 0 for r in pool}
    out = {}
    for v in relays:
        demand = trunk.outflow(v)
        if demand <= 0:
            continue
        pos = g.nodes[v].pos
        best = min(pool, key=lambda r: (dist(r.pos, pos) / r.speed + workload_weight * load[r.id], r.id))
        out[v] = best.id
        load[best.id] += demand
    return out


def mst_preorder(start: Point, points: list[Point]) -> list[int]:
    """Indices of ``points`` in preorder of their Euclidean MST rooted at ``start``.

    Children are visited nearest-first. The resulting open tour is at most
    twice the MST weight.
    """
    if not points:
        return []
    pts = np.array([start] + list(points), dtype=float)
    n = len(pts)
    d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = d[0].copy()
    par = np.zeros(n, dtype=int)
    kids: dict[int, list[int]] = {k: [] for k in range(n)}
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        j = int(np.argmin(cand))
        in_tree[j] = True
        kids[int(par[j])].append(j)
        upd = (d[j] < best) & ~in_tree
        best[upd] = d[j][upd]
        par[upd] = j
    order, stack = [], [0]
    while stack:
        v = stack.pop()
        if v:
            order.append(v - 1)
        stack.extend(sorted(kids[v], key=lambda c: (d[v, c], c), reverse=True))
    return order


def plan_deliveries(trunk: RelayTrunk, assignment: dict[int, int], robots: list[Robot],
                    pickup_id: int) -> dict[int, list[DeliveryGroup]]:
    """Group goals by (robot, collection node) and order each group.

    Goals with no relay on their trunk path go to the pickup robot from the
    source, in trunk preorder (the order batches serve them). All others are
    delivered from their last relay by that relay's receiver, in MST preorder.
    """
    g = trunk.graph
    groups: dict[tuple[int, int], list[int]] = {}
    for v in trunk.preorder():
        if trunk.kind(v) != NodeKind.GOAL:
            continue
        r = nearest_relay_ancestor(trunk, v)
        key = (pickup_id, g.source) if r is None else (assignment[r], r)
        groups.setdefault(key, []).append(v)
    out: dict[int, list[DeliveryGroup]] = {}
    for (rid, start), goals in sorted(groups.items()):
        if start != g.source:
            order = mst_preorder(g.nodes[start].pos, [g.nodes[v].pos for v in goals])
            goals = [goals[k] for k in order]
        out.setdefault(rid, []).append(DeliveryGroup(start, goals))
    return out


def synthesize_timelines(trunk: RelayTrunk, batches: list[PickupTour], assignment: dict[int, int],
                         deliveries: dict[int, list[DeliveryGroup]], scenario: Scenario,
                         pickup_id: int) -> tuple[list[Timeline], RelayLedger]:
    g = trunk.graph
    robots = {r.id: r for r in scenario.robots}
    tls = {r.id: Timeline(r.id, r.pos, r.speed, scenario.t_service) for r in scenario.robots}
    ledger = RelayLedger()
    pos = lambda v: g.nodes[v].pos

    tl = tls[pickup_id]
    for k, tour in enumerate(batches):
        tl.travel(scenario.source)
        tl.pickup(tour.load)
        for node, count in tour.stops:
            tl.travel(pos(node))
            if trunk.kind(node) == NodeKind.RELAY:
                a = tl.relay_drop(node, count)
                ledger.record_drop(node, a.start, a.end, count, pickup_id)
            else:
                for _ in range(count):
                    tl.deliver(g.nodes[node].ref)

    # (level, preorder index, phase, robot, payload); level = relay depth of the pick location
    rank = {v: k for k, v in enumerate(trunk.preorder())}
    tasks = []
    for r, rid in assignment.items():
        up = nearest_relay_ancestor(trunk, r)
        if up is not None:
            tasks.append((relay_depth(trunk, up), rank[r], 0, rid, ("forward", up, r, trunk.inflow(r))))
    for rid, groups in deliveries.items():
        for grp in groups:
            if grp.start != g.source:
                tasks.append((relay_depth(trunk, grp.start), rank[grp.start], 1, rid, ("deliver", grp)))
    tasks.sort(key=lambda t: (t[0], t[3], t[1], t[2]))

    def pick(tl: Timeline, relay: int, k: int):
        tl.travel(pos(relay))
        t0 = ledger.earliest_pick(relay, k, tl.time)
        tl.wait_until(t0)
        a = tl.relay_pick(relay, k)
        ledger.record_pick(relay, a.start, a.end, k, tl.robot_id)

    for *_, rid, payload in tasks:
        tl = tls[rid]
        cap = robots[rid].capacity
        if payload[0] == "forward":
            _, up, r, amount = payload
            while amount > 0:
                k = min(cap, amount)
                pick(tl, up, k)
                tl.travel(pos(r))
                a = tl.relay_drop(r, k)
                ledger.record_drop(r, a.start, a.end, k, rid)
                amount -= k
        else:
            grp = payload[1]
            for i in range(0, len(grp.goals), cap):
                chunk = grp.goals[i:i + cap]
                pick(tl, grp.start, len(chunk))
                for v in chunk:
                    tl.travel(pos(v))
                    tl.deliver(g.nodes[v].ref)

    for t in tls.values():
        if t.load != 0:
            raise InfeasiblePlan(f"robot {t.robot_id} ends with {t.load} undelivered packages")
        if max(t.load_trajectory(), default=0) > robots[t.robot_id].capacity:
            raise InfeasiblePlan(f"robot {t.robot_id} exceeds its capacity")
    return [tls[r.id] for r in scenario.robots], ledger


def plan_vcst(scenario: Scenario, service_weight: float | None = None, refine: bool = True,
              return_trunk: bool = False):
    """Full two-stage relay plan for a scenario.

    ``service_weight`` defaults to the scenario service time.
    """
    lam = scenario.t_service if service_weight is None else service_weight
    cells = compute_voronoi([r.pos for r in scenario.robots], scenario.workspace)
    cands = relay_candidates(cells)
    g = build_graph(scenario.source, scenario.goals, cands, scenario.speed, lam, scenario.workspace)
    trunk = plan_trunk(g, refine=refine)
    pid = scenario.robots[owner_of(cells, scenario.source)].id
    batches = plan_batches(trunk, next(r.capacity for r in scenario.robots if r.id == pid))
    assignment = assign_relays(trunk, scenario.robots, pid)
    deliveries = plan_deliveries(trunk, assignment, scenario.robots, pid)
    timelines, ledger = synthesize_timelines(trunk, batches, assignment, deliveries, scenario, pid)
    plan = Plan(
        planner="vcst",
        timelines=timelines,
        ledger=ledger,
        relays={v: g.nodes[v].pos for v in trunk.relay_nodes},
        relay_flow={v: (trunk.inflow(v), trunk.outflow(v)) for v in trunk.relay_nodes},
        n_batches=len(batches),
    )
    return (plan, trunk) if return_trunk else plan
