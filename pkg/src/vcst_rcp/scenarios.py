"""Seeded scenario families.

Random draws use numpy's ``Generator(PCG64(seed))``: PCG64 is a fixed,
documented 128-bit permuted congruential generator, so a (spec, seed) pair
yields the same scenario on every platform and numpy release that keeps
PCG64's stream stable.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import SeparationInfeasible
from .geometry import Point, Workspace, dist
from .model import Robot, Scenario

MIN_SEPARATION = 1.0
DEFAULT_CAPACITY = 4
SPEED = 5.0
T_SERVICE = 5.0


class Family(str, Enum):
    SMALL_DENSE = "small_dense"
    SMALL_SPARSE = "small_sparse"
    MEDIUM_BALANCED = "medium_balanced"
    LARGE_DISTRIBUTION = "large_distribution"
    LARGE_WAREHOUSE = "large_warehouse"
    HIGH_CAPACITY = "high_capacity"
    LOW_CAPACITY = "low_capacity"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ScenarioSpec:
    family: Family
    width: float
    height: float
    n_goals: int | tuple[int, int]  # a (lo, hi) range is drawn with the seed
    n_robots: int | tuple[int, int]
    capacity: int = DEFAULT_CAPACITY
    v_speed: float = SPEED
    t_service: float = T_SERVICE
    seed: int = 0
    source_center: bool = False


PRESETS: dict[Family, ScenarioSpec] = {
    Family.SMALL_DENSE: ScenarioSpec(Family.SMALL_DENSE, 100, 100, 8, 3),
    Family.SMALL_SPARSE: ScenarioSpec(Family.SMALL_SPARSE, 150, 150, 8, 3),
    Family.MEDIUM_BALANCED: ScenarioSpec(Family.MEDIUM_BALANCED, 200, 200, 15, (4, 5)),
    Family.LARGE_DISTRIBUTION: ScenarioSpec(Family.LARGE_DISTRIBUTION, 400, 400, (25, 30), (8, 10)),
    Family.LARGE_WAREHOUSE: ScenarioSpec(Family.LARGE_WAREHOUSE, 300, 300, (25, 30), (8, 10),
                                         source_center=True),
    Family.HIGH_CAPACITY: ScenarioSpec(Family.HIGH_CAPACITY, 200, 200, 15, (4, 5), capacity=6),
    Family.LOW_CAPACITY: ScenarioSpec(Family.LOW_CAPACITY, 200, 200, 15, (4, 5), capacity=2),
}

BENCHMARK_FAMILIES = [f for f in Family if f != Family.CUSTOM]


def preset(family: Family | str, seed: int = 0, **overrides) -> ScenarioSpec:
    fam = Family(family)
    return replace(PRESETS[fam], seed=seed, **overrides)


def _resolve(value, rng: np.random.Generator) -> int:
    if isinstance(value, tuple):
        lo, hi = value
        return int(rng.integers(lo, hi + 1))
    return int(value)


def _sample_points(rng: np.random.Generator, ws: Workspace, n: int, existing: list[Point],
                   max_tries: int = 10_000) -> list[Point]:
    out: list[Point] = []
    (x0, y0), (x1, y1) = ws.min_corner, ws.max_corner
    for _ in range(n):
        for _ in range(max_tries):
            p = (float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1)))
            if not (x0 < p[0] < x1 and y0 < p[1] < y1):
                continue
            if all(dist(p, q) >= MIN_SEPARATION for q in existing + out):
                out.append(p)
                break
        else:
            raise SeparationInfeasible(f"could not place {n} points {MIN_SEPARATION} m apart in {ws}")
    return out


def generate(spec: ScenarioSpec) -> Scenario:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n_goals = _resolve(spec.n_goals, rng)
    n_robots = _resolve(spec.n_robots, rng)
    ws = Workspace.box(spec.width, spec.height)
    if ws.width * ws.height < (n_goals + n_robots + 1) * MIN_SEPARATION ** 2:
        raise SeparationInfeasible("workspace too small for the requested counts")
    if spec.source_center:
        source = (ws.width / 2, ws.height / 2)
    else:
        source = _sample_points(rng, ws, 1, [])[0]
    goals = _sample_points(rng, ws, n_goals, [source])
    robot_pos = _sample_points(rng, ws, n_robots, [source] + goals)
    robots = [Robot(i, p, spec.capacity, spec.v_speed) for i, p in enumerate(robot_pos)]
    return Scenario(workspace=ws, source=source, goals=goals, robots=robots,
                    t_service=spec.t_service, seed=spec.seed, family=spec.family.value)
