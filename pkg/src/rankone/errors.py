"""Shared exception types.

The CLI maps these onto exit codes: SpecError and subclasses -> 2,
OrbitEscaped -> 3, anything else -> 4.
"""

from __future__ import annotations

__all__ = ["SpecError", "OrbitEscaped", "EmptyFSetError"]


class SpecError(ValueError):
    """Invalid parameters, empty ranges, or refused degenerate requests."""


class EmptyFSetError(SpecError):
    """The chosen column family carries no joining mass."""


class OrbitEscaped(RuntimeError):
    """An orbit left the resolvable region within the allowed stage budget.

    Attributes carry enough context to retry with a deeper budget.
    """

    def __init__(self, message: str, *, point=None, stage_budget=None, steps_done=None):
        super().__init__(message)
        self.point = point
        self.stage_budget = stage_budget
        self.steps_done = steps_done
