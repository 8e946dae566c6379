"""Exception types raised by the planner.

Validation problems in finished plans are reported as data (see
:mod:`vcst_rcp.simulation`), not raised.
"""


class PlanningError(Exception):
    """Base class for all planner errors."""


class DuplicateSites(PlanningError):
    pass


class SiteOutsideWorkspace(PlanningError):
    pass


class NoSharedEdge(PlanningError):
    pass


class EmptyGoals(PlanningError):
    pass


class NodeNotFound(PlanningError):
    pass


class DisconnectedGraph(PlanningError):
    pass


class GoalNotInTrunk(PlanningError):
    pass


class InstanceTooLarge(PlanningError):
    pass


class ZeroCapacity(PlanningError):
    pass


class NoRobots(PlanningError):
    pass


class InfeasiblePlan(PlanningError):
    """Capacity or causality could not be met. Signals an internal bug."""


class EmptyMatrix(PlanningError):
    pass


class UnvalidatedInput(PlanningError):
    pass


class SeparationInfeasible(PlanningError):
    pass
