"""Exception hierarchy shared by every module.

Each class carries a short machine-readable ``code`` used by the CLI's
error JSON.
"""

from __future__ import annotations


class SiegelError(Exception):
    code = "error"

    def to_json(self) -> dict:
        return {"error": self.code, "message": str(self)}


class DomainError(SiegelError, ValueError):
    code = "domain_error"


class PrecisionExhausted(SiegelError):
    code = "precision_exhausted"

    def __init__(self, message: str, *, step: int | None = None):
        super().__init__(message)
        self.step = step

    def to_json(self) -> dict:
        out = super().to_json()
        if self.step is not None:
            out["step"] = self.step
        return out


class Terminated(SiegelError):
    """Raised when a continued-fraction expansion ends (rational input)."""

    code = "terminated"

    def __init__(self, message: str, *, terms: list[int] | None = None):
        super().__init__(message)
        self.terms = list(terms or [])

    def to_json(self) -> dict:
        out = super().to_json()
        out["terms"] = self.terms
        return out


class ConsistencyViolation(SiegelError):
    code = "consistency_violation"


class EmptySet(SiegelError, ValueError):
    code = "empty_set"


class EmptyPrefix(SiegelError, ValueError):
    code = "empty_prefix"


class InsufficientTerms(SiegelError, ValueError):
    code = "insufficient_terms"


class BudgetExceeded(SiegelError):
    code = "budget_exceeded"

    def __init__(self, message: str, *, cursor: dict | None = None):
        super().__init__(message)
        self.cursor = cursor

    def to_json(self) -> dict:
        out = super().to_json()
        if self.cursor is not None:
            out["cursor"] = self.cursor
        return out


class OriginCovered(SiegelError):
    code = "origin_covered"


class PreconditionError(SiegelError, ValueError):
    code = "precondition"


class InfeasibleDrop(SiegelError):
    code = "infeasible_drop"


class SequenceViolation(SiegelError):
    code = "sequence_violation"


class PredicateViolation(SiegelError):
    code = "predicate_violation"
