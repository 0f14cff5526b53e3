"""Exceptions raised by the planner. Each carries the CLI exit code it maps to."""

from typing import Optional


class PlannerError(Exception):
    """Base error. `detail` is the single-line reason shown to the user."""

    exit_code = 3

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class UsageError(PlannerError):
    exit_code = 1


class ScenarioValidationError(PlannerError):
    """A scenario document or config violates an invariant."""

    exit_code = 2

    def __init__(self, detail: str, field: Optional[str] = None):
        super().__init__(f"{field}: {detail}" if field else detail)
        self.field = field


class GenerationError(PlannerError):
    """Random scenario generation could not place everything."""

    exit_code = 2


class TraceFormatError(PlannerError):
    exit_code = 2

    def __init__(self, detail: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {detail}" if line is not None else detail)
        self.line = line


class PlanningError(PlannerError):
    """CBS could not produce a conflict-free plan (budget or unroutable agent)."""

    exit_code = 3

    def __init__(self, detail: str, stats=None):
        super().__init__(detail)
        self.stats = stats
