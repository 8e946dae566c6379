"""Scenario, robot and schedule types shared by every planner."""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .errors import InfeasiblePlan
from .geometry import Point, Workspace, dist

TRAVEL = "travel"
PICKUP = "pickup"
RELAY_DROP = "relay_drop"
RELAY_PICK = "relay_pick"
DELIVER = "deliver"
WAIT = "wait"

SERVICE_KINDS = (PICKUP, RELAY_DROP, RELAY_PICK, DELIVER)
ACTION_KINDS = (TRAVEL, WAIT) + SERVICE_KINDS


@dataclass(frozen=True)
class Robot:
    id: int
    pos: Point
    capacity: int
    speed: float


@dataclass
class Scenario:
    workspace: Workspace
    source: Point
    goals: list[Point]
    robots: list[Robot]
    t_service: float = 5.0
    seed: int = 0
    family: str = "custom"

    @property
    def n_goals(self) -> int:
        return len(self.goals)

    @property
    def capacity(self) -> int:
        return min(r.capacity for r in self.robots)

    @property
    def speed(self) -> float:
        return self.robots[0].speed

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "workspace": {"w": self.workspace.width, "h": self.workspace.height},
            "source": list(self.source),
            "goals": [list(g) for g in self.goals],
            "robots": [{"id": r.id, "pos": list(r.pos), "capacity": r.capacity, "speed": r.speed}
                       for r in self.robots],
            "t_service": self.t_service,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, d: dict) -> Scenario:
        return cls(
            workspace=Workspace.box(d["workspace"]["w"], d["workspace"]["h"]),
            source=tuple(d["source"]),
            goals=[tuple(g) for g in d["goals"]],
            robots=[Robot(r["id"], tuple(r["pos"]), int(r["capacity"]), float(r["speed"]))
                    for r in d["robots"]],
            t_service=float(d["t_service"]),
            seed=int(d["seed"]),
            family=d["family"],
        )


@dataclass
class Action:
    kind: str
    start: float
    end: float
    src: Point | None = None  # travel only
    dst: Point | None = None  # travel only
    count: int = 0  # packages moved by pickup / relay actions
    node: int | None = None  # relay node id, or goal id for deliveries

    @property
    def duration(self) -> float:
        return self.end - self.start

    @property
    def length(self) -> float:
        return dist(self.src, self.dst) if self.kind == TRAVEL else 0.0

    def to_json(self) -> dict:
        d = {"kind": self.kind, "start": self.start, "end": self.end}
        if self.kind == TRAVEL:
            d["from"], d["to"] = list(self.src), list(self.dst)
        if self.kind in (PICKUP, RELAY_DROP, RELAY_PICK):
            d["count"] = self.count
        if self.node is not None:
            d["node"] = self.node
        return d

    @classmethod
    def from_json(cls, d: dict) -> Action:
        return cls(kind=d["kind"], start=d["start"], end=d["end"],
                   src=tuple(d["from"]) if "from" in d else None,
                   dst=tuple(d["to"]) if "to" in d else None,
                   count=d.get("count", 0), node=d.get("node"))


@dataclass
class Timeline:
    """Per-robot action list, built append-only with a moving cursor.

    ``position``, ``time`` and ``load`` track the robot state after the last
    appended action.
    """

    robot_id: int
    start_pos: Point
    speed: float
    t_service: float
    actions: list[Action] = field(default_factory=list)

    def __post_init__(self):
        self.position: Point = self.start_pos
        self.time = self.actions[-1].end if self.actions else 0.0
        self.load = 0

    def _push(self, a: Action) -> Action:
        self.actions.append(a)
        self.time = a.end
        return a

    def travel(self, to: Point) -> None:
        to = (float(to[0]), float(to[1]))
        if to == self.position:
            return
        d = dist(self.position, to)
        self._push(Action(TRAVEL, self.time, self.time + d / self.speed, self.position, to))
        self.position = to

    def _service(self, kind: str, count: int = 0, node: int | None = None) -> Action:
        return self._push(Action(kind, self.time, self.time + self.t_service, count=count, node=node))

    def pickup(self, count: int) -> Action:
        self.load += count
        return self._service(PICKUP, count)

    def relay_drop(self, relay: int, count: int) -> Action:
        self.load -= count
        return self._service(RELAY_DROP, count, relay)

    def relay_pick(self, relay: int, count: int) -> Action:
        self.load += count
        return self._service(RELAY_PICK, count, relay)

    def deliver(self, goal: int) -> Action:
        self.load -= 1
        return self._service(DELIVER, node=goal)

    def wait_until(self, t: float) -> None:
        if t > self.time:
            self._push(Action(WAIT, self.time, t))

    @property
    def distance(self) -> float:
        return sum(a.length for a in self.actions)

    @property
    def end_time(self) -> float:
        return self.actions[-1].end if self.actions else 0.0

    @property
    def wait_time(self) -> float:
        return sum(a.duration for a in self.actions if a.kind == WAIT)

    def load_trajectory(self) -> list[int]:
        out, load = [], 0
        for a in self.actions:
            if a.kind in (PICKUP, RELAY_PICK):
                load += a.count
            elif a.kind == RELAY_DROP:
                load -= a.count
            elif a.kind == DELIVER:
                load -= 1
            out.append(load)
        return out

    def to_json(self) -> dict:
        return {"robot": self.robot_id, "start": list(self.start_pos),
                "actions": [a.to_json() for a in self.actions]}


@dataclass
class LedgerEvent:
    kind: str  # "drop" or "pick"
    start: float
    end: float
    count: int
    robot: int


class RelayLedger:
    """Drop/pick events per relay node with causal pick reservation.

    A pick of ``k`` packages at time ``t`` is causal when, for every time
    ``s >= t``, packages dropped (drop end <= s) minus packages picked
    (pick start <= s) stays non-negative after adding the new pick.
    """

    def __init__(self):
        self.events: dict[int, list[LedgerEvent]] = {}

    def record_drop(self, relay: int, start: float, end: float, count: int, robot: int) -> None:
        self.events.setdefault(relay, []).append(LedgerEvent("drop", start, end, count, robot))

    def record_pick(self, relay: int, start: float, end: float, count: int, robot: int) -> None:
        self.events.setdefault(relay, []).append(LedgerEvent("pick", start, end, count, robot))

    def earliest_pick(self, relay: int, count: int, not_before: float) -> float:
        """Earliest start >= ``not_before`` at which ``count`` packages can be picked causally."""
        evs = self.events.get(relay, [])
        # balance changes: drops count at their end, picks at their start
        steps = sorted([(e.end, e.count) for e in evs if e.kind == "drop"]
                       + [(e.start, -e.count) for e in evs if e.kind == "pick"])
        times = sorted({t for t, _ in steps})
        bal, level = 0, {}
        by_time: dict[float, int] = {}
        for t, c in steps:
            by_time[t] = by_time.get(t, 0) + c
        for t in times:
            bal += by_time[t]
            level[t] = bal
        # suffix minimum of the balance from each breakpoint onwards
        suffix_min, run = {}, float("inf")
        for t in reversed(times):
            run = min(run, level[t])
            suffix_min[t] = run
        i = bisect.bisect_right(times, not_before)
        base = level[times[i - 1]] if i > 0 else 0
        future = suffix_min[times[i]] if i < len(times) else float("inf")
        if min(base, future) >= count:
            return not_before
        for t in times[i:]:
            if suffix_min[t] >= count:
                return t
        raise InfeasiblePlan(f"relay {relay}: {count} packages never become available")

    def buffer(self, relay: int) -> int:
        return sum(e.count if e.kind == "drop" else -e.count for e in self.events.get(relay, []))

    def totals(self, relay: int) -> tuple[int, int]:
        evs = self.events.get(relay, [])
        return (sum(e.count for e in evs if e.kind == "drop"),
                sum(e.count for e in evs if e.kind == "pick"))

    def to_json(self) -> dict:
        return {str(r): [vars(e) for e in evs] for r, evs in sorted(self.events.items())}

    @classmethod
    def from_json(cls, d: dict) -> RelayLedger:
        led = cls()
        for r, evs in d.items():
            led.events[int(r)] = [LedgerEvent(**e) for e in evs]
        return led


@dataclass
class Plan:
    planner: str
    timelines: list[Timeline]
    ledger: RelayLedger = field(default_factory=RelayLedger)
    relays: dict[int, Point] = field(default_factory=dict)  # relay node id -> position
    # expected packages dropped / picked per relay, from trunk flows
    relay_flow: dict[int, tuple[int, int]] = field(default_factory=dict)
    n_batches: int = 0
    validated: bool = False

    @property
    def n_relays_used(self) -> int:
        return len(self.relays)

    def to_json(self) -> dict:
        return {
            "planner": self.planner,
            "n_batches": self.n_batches,
            "relays": {str(k): list(v) for k, v in sorted(self.relays.items())},
            "relay_flow": {str(k): list(v) for k, v in sorted(self.relay_flow.items())},
            "timelines": [t.to_json() for t in self.timelines],
            "ledger": self.ledger.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict, scenario: Scenario) -> Plan:
        robots = {r.id: r for r in scenario.robots}
        tls = []
        for t in d["timelines"]:
            r = robots[t["robot"]]
            tls.append(Timeline(r.id, tuple(t["start"]), r.speed, scenario.t_service,
                                [Action.from_json(a) for a in t["actions"]]))
        return cls(
            planner=d["planner"],
            timelines=tls,
            ledger=RelayLedger.from_json(d["ledger"]),
            relays={int(k): tuple(v) for k, v in d["relays"].items()},
            relay_flow={int(k): tuple(v) for k, v in d["relay_flow"].items()},
            n_batches=d.get("n_batches", 0),
        )
