"""Relay-trunk planning for capacity-limited delivery robots.

Robots partition the workspace into Voronoi cells; packages flow from a
single source to goals along a Steiner trunk whose relay nodes sit on shared
cell edges, so each leg is driven by the robot owning that region.
"""
from .baselines import hungarian_assign, plan_cvrp, plan_hungarian
from .coordination import plan_vcst
from .errors import PlanningError
from .geometry import Workspace, compute_voronoi, relay_candidates, relay_point
from .model import Plan, Robot, Scenario, Timeline
from .scenarios import Family, ScenarioSpec, generate, preset
from .simulation import PlanMetrics, Violation, compute_metrics, validate
from .steiner_trunk import RelayTrunk, build_trunk, exact_steiner, plan_trunk, route_demands
from .transport_graph import TransportGraph, build_graph, shortest_path

__version__ = "0.1.0"
