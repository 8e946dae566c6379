"""Direct-transport baselines: Hungarian round dispatch and a savings-based CVRP stand-in.

Neither uses relays. Both charge the same service time per pickup and
delivery as the relay planner so makespans are comparable.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import EmptyMatrix
from .geometry import Point, dist
from .model import Plan, Robot, Scenario, Timeline


def hungarian_assign(cost) -> tuple[list[tuple[int, int]], float]:
    """Minimum-cost matching of rows to columns; rectangular matrices match min(rows, cols) pairs."""
    cost = np.asarray(cost, dtype=float)
    if cost.size == 0:
        raise EmptyMatrix("empty cost matrix")
    if not np.all(np.isfinite(cost)) or np.any(cost < 0):
        raise ValueError("costs must be finite and non-negative")
    rows, cols = linear_sum_assignment(cost)
    pairs = sorted(zip(rows.tolist(), cols.tolist()))
    return pairs, float(cost[rows, cols].sum())


def nearest_neighbor_order(start: Point, points: list[Point]) -> list[int]:
    left = list(range(len(points)))
    order, here = [], start
    while left:
        k = min(left, key=lambda i: (dist(here, points[i]), i))
        order.append(k)
        left.remove(k)
        here = points[k]
    return order


def hungarian_rounds(scenario: Scenario) -> dict[int, list[int]]:
    """Goal lists per robot from repeated assignment rounds.

    Every round matches min(M, remaining) goals one-to-one to robots. A goal
    is priced at the robot's trip to the source from where it currently is
    (start pose, then its last goal) plus the leg from the source to the goal.
    """
    S, v = scenario.source, scenario.speed
    robots = scenario.robots
    here = [r.pos for r in robots]
    remaining = list(range(scenario.n_goals))
    lists: dict[int, list[int]] = {r.id: [] for r in robots}
    while remaining:
        cost = np.array([[(dist(p, S) + dist(S, scenario.goals[g])) / v for g in remaining]
                         for p in here])
        pairs, _ = hungarian_assign(cost)
        taken = set()
        for i, j in pairs:
            gid = remaining[j]
            lists[robots[i].id].append(gid)
            here[i] = scenario.goals[gid]
            taken.add(gid)
        remaining = [g for g in remaining if g not in taken]
    return lists


def _run_departures(tl: Timeline, scenario: Scenario, departures: list[list[int]]) -> None:
    for k, goal_ids in enumerate(departures):
        tl.travel(scenario.source)
        tl.pickup(len(goal_ids))
        for gid in goal_ids:
            tl.travel(scenario.goals[gid])
            tl.deliver(gid)


def plan_hungarian(scenario: Scenario) -> Plan:
    """Each robot departs the source with up to C of its assigned goals, nearest-neighbour order.

    Consecutive rounds' goals share a departure when capacity allows; the
    robot returns to the source between departures.
    """
    lists = hungarian_rounds(scenario)
    tls = []
    for r in scenario.robots:
        tl = Timeline(r.id, r.pos, r.speed, scenario.t_service)
        goals = lists[r.id]
        deps = []
        for i in range(0, len(goals), r.capacity):
            chunk = goals[i:i + r.capacity]
            order = nearest_neighbor_order(scenario.source, [scenario.goals[g] for g in chunk])
            deps.append([chunk[k] for k in order])
        _run_departures(tl, scenario, deps)
        tls.append(tl)
    return Plan(planner="hungarian", timelines=tls,
                n_batches=sum(-(-len(g) // scenario.capacity) for g in lists.values()))


def route_length(S: Point, route: list[Point]) -> float:
    """Closed tour length S -> route -> S."""
    pts = [S] + list(route) + [S]
    return sum(dist(a, b) for a, b in zip(pts, pts[1:]))


def two_opt(S: Point, route: list[int], pts: list[Point]) -> list[int]:
    best = list(route)
    coords = lambda r: [S] + [pts[i] for i in r] + [S]
    improved = True
    while improved:
        improved = False
        c = coords(best)
        n = len(c)
        for i in range(1, n - 2):
            for j in range(i + 1, n - 1):
                delta = (dist(c[i - 1], c[j]) + dist(c[i], c[j + 1])
                         - dist(c[i - 1], c[i]) - dist(c[j], c[j + 1]))
                if delta < -1e-10:
                    best[i - 1:j] = best[i - 1:j][::-1]
                    improved = True
                    break
            if improved:
                break
    return best


def clarke_wright(S: Point, pts: list[Point], capacity: int) -> list[list[int]]:
    """Parallel savings construction with unit demands, then 2-opt per route."""
    n = len(pts)
    routes = {i: [i] for i in range(n)}
    where = {i: i for i in range(n)}  # goal -> route key
    savings = []
    for i in range(n):
        for j in range(i + 1, n):
            s = dist(S, pts[i]) + dist(S, pts[j]) - dist(pts[i], pts[j])
            if s > 1e-12:
                savings.append((-s, i, j))
    savings.sort()
    for _, i, j in savings:
        ri, rj = where[i], where[j]
        if ri == rj:
            continue
        a, b = routes[ri], routes[rj]
        if len(a) + len(b) > capacity:
            continue
        # merge only at route ends
        if a[-1] == i and b[0] == j:
            merged = a + b
        elif a[0] == i and b[-1] == j:
            merged = b + a
        elif a[0] == i and b[0] == j:
            merged = a[::-1] + b
        elif a[-1] == i and b[-1] == j:
            merged = a + b[::-1]
        else:
            continue
        routes[ri] = merged
        del routes[rj]
        for g in b:
            where[g] = ri
    out = [two_opt(S, r, pts) for _, r in sorted(routes.items())]
    return out


def _dispatch_routes(scenario: Scenario, routes: list[list[int]]) -> dict[int, list[list[int]]]:
    """Longest-route-first assignment to the robot that would finish it earliest."""
    S, v, ts = scenario.source, scenario.speed, scenario.t_service
    finish = {r.id: dist(r.pos, S) / v for r in scenario.robots}
    used = {r.id: [] for r in scenario.robots}
    key = lambda r: (-route_length(S, [scenario.goals[g] for g in r]), r)
    for route in sorted(routes, key=key):
        t = route_length(S, [scenario.goals[g] for g in route]) / v + ts * (1 + len(route))
        rid = min(finish, key=lambda k: (finish[k] + t, k))
        finish[rid] += t
        used[rid].append(route)
    return used


def cvrp_routes(scenario: Scenario) -> list[list[int]]:
    return clarke_wright(scenario.source, scenario.goals, scenario.capacity)


def plan_cvrp(scenario: Scenario) -> Plan:
    """Savings routes run by the fleet; a robot runs several routes back to back when needed."""
    routes = cvrp_routes(scenario)
    per_robot = _dispatch_routes(scenario, routes)
    tls = []
    for r in scenario.robots:
        tl = Timeline(r.id, r.pos, r.speed, scenario.t_service)
        _run_departures(tl, scenario, per_robot[r.id])
        tls.append(tl)
    return Plan(planner="cvrp", timelines=tls, n_batches=len(routes))
