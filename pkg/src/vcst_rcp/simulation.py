"""Plan validation, event replay and metrics.

The validator works only from the timelines, the scenario and the relay
positions recorded in the plan. It rebuilds the relay buffers itself rather
than trusting the planner's ledger, then cross-checks the two.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .errors import UnvalidatedInput
from .geometry import dist
from .model import (DELIVER, PICKUP, RELAY_DROP, RELAY_PICK, SERVICE_KINDS, TRAVEL, WAIT,
                    Plan, Scenario)

TIME_TOL = 1e-9
POS_TOL = 1e-9


@dataclass(frozen=True)
class Violation:
    kind: str
    robot: int | None
    index: int | None
    message: str

    def __str__(self):
        where = "" if self.robot is None else f" robot {self.robot}"
        where += "" if self.index is None else f" action {self.index}"
        return f"{self.kind}{where}: {self.message}"


@dataclass
class PlanMetrics:
    total_distance: float  # km
    packages_per_km: float
    makespan: float  # min
    active_makespan: float  # min
    per_robot_distance: list[float]  # km
    n_waits: int = 0
    wait_time: float = 0.0  # s


def _near(a, b, tol=POS_TOL) -> bool:
    return a is not None and b is not None and dist(a, b) <= tol


def validate(plan: Plan, scenario: Scenario) -> list[Violation]:
    """All physics, capacity, causality and completeness violations; [] for a sound plan."""
    out: list[Violation] = []
    V = lambda kind, rid, k, msg: out.append(Violation(kind, rid, k, msg))
    robots = {r.id: r for r in scenario.robots}
    events: dict[int, list[tuple[str, float, float, int, int]]] = {}
    delivered: Counter = Counter()
    picked_at_source = 0

    for tl in plan.timelines:
        rid = tl.robot_id
        robot = robots.get(rid)
        if robot is None:
            V("UnknownRobot", rid, None, "timeline for a robot not in the scenario")
            continue
        if not _near(tl.start_pos, robot.pos):
            V("LocationViolation", rid, None, f"starts at {tl.start_pos}, robot is at {robot.pos}")
        pos, t, load = robot.pos, 0.0, 0
        for k, a in enumerate(tl.actions):
            if abs(a.start - t) > TIME_TOL:
                V("ContinuityViolation", rid, k, f"starts at {a.start}, previous action ended at {t}")
            if a.end < a.start:
                V("ContinuityViolation", rid, k, f"ends ({a.end}) before it starts ({a.start})")
            t = a.end
            if a.kind == TRAVEL:
                if not _near(a.src, pos):
                    V("LocationViolation", rid, k, f"travel leaves from {a.src}, robot is at {pos}")
                want = dist(a.src, a.dst) / robot.speed
                if abs(a.duration - want) > TIME_TOL:
                    V("TravelViolation", rid, k, f"duration {a.duration} s, distance implies {want} s")
                pos = a.dst
            elif a.kind in SERVICE_KINDS:
                if abs(a.duration - scenario.t_service) > TIME_TOL:
                    V("ServiceDurationViolation", rid, k, f"{a.kind} lasts {a.duration} s, not {scenario.t_service} s")
                if a.kind in (PICKUP, RELAY_DROP, RELAY_PICK) and a.count < 1:
                    V("CountViolation", rid, k, f"{a.kind} moves {a.count} packages")
                if a.kind == PICKUP:
                    if not _near(pos, scenario.source):
                        V("LocationViolation", rid, k, f"pickup away from the source at {pos}")
                    load += a.count
                    picked_at_source += a.count
                elif a.kind in (RELAY_DROP, RELAY_PICK):
                    rpos = plan.relays.get(a.node)
                    if rpos is None:
                        V("LocationViolation", rid, k, f"unknown relay {a.node}")
                    elif not _near(pos, rpos):
                        V("LocationViolation", rid, k, f"{a.kind} at {pos}, relay {a.node} is at {rpos}")
                    load += a.count if a.kind == RELAY_PICK else -a.count
                    events.setdefault(a.node, []).append(
                        ("pick" if a.kind == RELAY_PICK else "drop", a.start, a.end, a.count, rid))
                else:
                    if a.node is None or not 0 <= a.node < scenario.n_goals:
                        V("DeliveryViolation", rid, k, f"delivery to unknown goal {a.node}")
                    elif not _near(pos, scenario.goals[a.node]):
                        V("LocationViolation", rid, k, f"delivers goal {a.node} from {pos}")
                    delivered[a.node] += 1
                    load -= 1
            elif a.kind == WAIT:
                pass
            else:
                V("UnknownAction", rid, k, f"action kind {a.kind!r}")
            if load < 0:
                V("LoadViolation", rid, k, f"load {load} below zero")
            if load > robot.capacity:
                V("CapacityViolation", rid, k, f"load {load} exceeds capacity {robot.capacity}")
        if load != 0:
            V("LoadViolation", rid, None, f"finishes holding {load} packages")

    for gid in range(scenario.n_goals):
        if delivered[gid] != 1:
            V("DeliveryViolation", None, None, f"goal {gid} delivered {delivered[gid]} times")
    if picked_at_source != scenario.n_goals:
        V("FlowViolation", None, None, f"{picked_at_source} packages left the source, expected {scenario.n_goals}")

    for relay, evs in sorted(events.items()):
        out.extend(_causality(relay, evs))
    out.extend(_ledger_mismatch(plan, events))
    for relay, (inflow, outflow) in sorted(plan.relay_flow.items()):
        evs = events.get(relay, [])
        drops = sum(e[3] for e in evs if e[0] == "drop")
        picks = sum(e[3] for e in evs if e[0] == "pick")
        if drops != inflow or picks != outflow:
            V("FlowViolation", None, None,
              f"relay {relay}: dropped {drops}/picked {picks}, trunk flow is {inflow} in/{outflow} out")
    plan.validated = not out
    return out


def _causality(relay: int, evs) -> list[Violation]:
    out = []
    drops = sorted((e[2], e[3]) for e in evs if e[0] == "drop")  # by end time
    picks = sorted((e[1], e[3], e[4]) for e in evs if e[0] == "pick")  # by start time
    total_picked = 0
    for start, count, rid in picks:
        total_picked += count
        available = sum(c for end, c in drops if end <= start)
        if total_picked > available:
            out.append(Violation("CausalityViolation", rid, None,
                                 f"relay {relay}: pick at t={start} needs {total_picked} dropped, only {available}"))
    buffer = sum(c for _, c in drops) - total_picked
    if buffer != 0:
        out.append(Violation("CausalityViolation", None, None, f"relay {relay} ends holding {buffer} packages"))
    return out


def _ledger_mismatch(plan: Plan, events) -> list[Violation]:
    mine = Counter((r, e) for r, evs in events.items() for e in evs)
    theirs = Counter((r, (e.kind, e.start, e.end, e.count, e.robot))
                     for r, evs in plan.ledger.events.items() for e in evs)
    if mine != theirs:
        return [Violation("LedgerViolation", None, None,
                          f"ledger disagrees with timelines on {sum((mine - theirs).values()) + sum((theirs - mine).values())} events")]
    return []


def event_trace(plan: Plan) -> list[tuple[float, int, str, int | None]]:
    """Time-ordered (start, robot, kind, node) across the fleet."""
    rows = [(a.start, tl.robot_id, a.kind, a.node) for tl in plan.timelines for a in tl.actions]
    return sorted(rows, key=lambda r: (r[0], r[1]))


def compute_metrics(plan: Plan, scenario: Scenario) -> PlanMetrics:
    if not plan.validated:
        raise UnvalidatedInput("run validate() on the plan first")
    per_robot = [tl.distance / 1000.0 for tl in plan.timelines]
    total = sum(per_robot)
    ends = [tl.end_time for tl in plan.timelines if tl.actions]
    active = [tl.end_time - tl.wait_time for tl in plan.timelines if tl.actions]
    waits = [a for tl in plan.timelines for a in tl.actions if a.kind == WAIT]
    return PlanMetrics(
        total_distance=total,
        packages_per_km=scenario.n_goals / total if total > 0 else float("inf"),
        makespan=max(ends, default=0.0) / 60.0,
        active_makespan=max(active, default=0.0) / 60.0,
        per_robot_distance=per_robot,
        n_waits=len(waits),
        wait_time=sum(a.duration for a in waits),
    )
