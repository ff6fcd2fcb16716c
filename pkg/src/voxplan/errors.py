"""Exception hierarchy shared by the pipeline stages."""

from __future__ import annotations


class VoxplanError(Exception):
    """Base class for all errors raised by voxplan."""


class InputError(VoxplanError):
    """A document (grid, plan, rules, scenario) could not be loaded."""


class ColorError(InputError, ValueError):
    pass


class GridFormatError(InputError):
    pass


class BoundsError(VoxplanError, IndexError):
    """A coordinate lies outside the grid."""


class ColumnFullError(VoxplanError):
    """A column has no free level left."""


class PlanParseError(InputError):
    """Plan text is not a structurally valid plan.

    ``path`` is a JSON path such as ``$.actions[1].count``.
    """

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message


class UnsupportedActionError(PlanParseError):
    pass


class DimensionViolationError(PlanParseError):
    """A 2-D plan tried to carry a vertical coordinate."""


class ExecutionError(VoxplanError):
    """Executing a plan failed; ``action_index`` names the offending action."""

    def __init__(self, message: str, action_index: int | None = None):
        prefix = f"action {action_index}: " if action_index is not None else ""
        super().__init__(prefix + message)
        self.action_index = action_index


class AnchorError(ExecutionError):
    """A relative anchor could not be resolved."""


class ShapeBrokenError(VoxplanError):
    pass


class RuleLoadError(InputError):
    pass


class PlannerError(VoxplanError):
    pass


class FixtureError(PlannerError):
    pass


class TransportError(PlannerError):
    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class PlannerTimeout(TransportError):
    pass
