"""Exception hierarchy shared by the engines, services and CLI"""

from typing import Optional

from .constants import ExitCodes


class PlannerError(Exception):
    exit_code = ExitCodes.SIMULATION


class UsageError(PlannerError):
    exit_code = ExitCodes.USAGE


class ScenarioParseError(PlannerError):
    """Scenario text is not well-formed YAML or has the wrong shape"""

    exit_code = ExitCodes.SCENARIO

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class ScenarioValidationError(PlannerError):
    """A scenario violates one of its invariants"""

    exit_code = ExitCodes.SCENARIO

    def __init__(self, invariant: str, field: Optional[str] = None):
        self.invariant = invariant
        self.field = field
        super().__init__(f"{field}: {invariant}" if field else invariant)


class SimulationFault(PlannerError):
    """Numerical or physical failure inside a rollout.

    kind is one of: ill-conditioned, gimbal, degenerate-thrust, non-finite,
    apf-local-minimum.
    """

    exit_code = ExitCodes.SIMULATION

    def __init__(self, kind: str, message: str = "", time: Optional[float] = None):
        self.kind = kind
        self.time = time
        super().__init__(f"{kind}: {message}" if message else kind)


class OutputError(PlannerError):
    exit_code = ExitCodes.IO

    def __init__(self, path, reason: str):
        self.path = str(path)
        super().__init__(f"cannot write {self.path}: {reason}")


class ReachingMarginWarning(UserWarning):
    """Switching gain does not dominate the disturbance and load-effect bounds"""
