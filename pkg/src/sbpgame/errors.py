"""Exception hierarchy shared by the engine and the command line."""

from __future__ import annotations

from typing import Any


class SBPError(Exception):
    """Base class for all domain errors raised by the engine."""

    kind = "error"

    def __init__(self, message: str, **detail: Any) -> None:
        super().__init__(message)
        self.detail = detail

    def to_json(self) -> dict[str, Any]:
        payload: dict[str, Any] = {"error": self.kind, "message": str(self)}
        payload.update(self.detail)
        return payload


class ParseError(SBPError, ValueError):
    kind = "parse"


class InvalidInstanceError(SBPError, ValueError):
    kind = "invalid_instance"


class InvalidPackingError(SBPError, ValueError):
    """A packing that is not a valid partition into bins of load at most one.

    ``reason`` is one of ``overlap``, ``missing``, ``unknown_index``,
    ``overflow`` or ``empty_bin``; ``bin`` and ``item`` locate the offence.
    """

    kind = "invalid_packing"

    def __init__(self, reason: str, message: str, *, bin: int | None = None,
                 item: int | None = None) -> None:
        detail: dict[str, Any] = {"reason": reason}
        if bin is not None:
            detail["bin"] = bin
        if item is not None:
            detail["item"] = item
        super().__init__(message, **detail)
        self.reason = reason
        self.bin = bin
        self.item = item


class LimitExceededError(SBPError):
    """Raised instead of silently approximating an exhaustive computation."""

    kind = "limit_exceeded"


class NotAnEquilibriumError(SBPError, ValueError):
    kind = "not_an_equilibrium"


class TheoremViolation(SBPError):
    """An empirical check contradicted a proven bound; signals an engine bug."""

    kind = "theorem_violation"


class EngineInconsistency(SBPError, AssertionError):
    """Two independent computations of the same quantity disagreed."""

    kind = "engine_inconsistency"
