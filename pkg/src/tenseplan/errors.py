"""Exception hierarchy shared by the planners and the CLI."""


class PlanningError(Exception):
    """Base class for every error raised by tenseplan."""


class DimensionError(PlanningError, ValueError):
    """Joint vector length does not match the segment count."""


class DegenerateDirection(PlanningError):
    """A point coincides with an obstacle center, so no clearance normal exists."""


# end-effector path planning

class NoFeasiblePath(PlanningError):
    pass


class InvalidEndpoint(PlanningError):
    pass


class CorridorInfeasible(NoFeasiblePath):
    """The fine pass found no path inside the coarse corridor; widen the margin."""


# body motion

class SolverError(PlanningError):
    pass


class SingularJacobian(SolverError):
    pass


class InconsistentConstraints(SolverError):
    pass


class IterationLimit(SolverError):
    pass


# scenario handling

class ParseError(PlanningError):
    pass


class ValidationError(PlanningError, ValueError):
    pass


class StageError(PlanningError):
    """Wraps a failure raised inside one pipeline stage.

    ``stage`` names the stage and ``__cause__`` holds the original error.
    """

    def __init__(self, stage, error):
        super().__init__(f"[{stage}] {type(error).__name__}: {error}")
        self.stage = stage
        self.error = error
