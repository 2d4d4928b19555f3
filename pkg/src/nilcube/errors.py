"""Exception types and the shared check-result record."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


class NilcubeError(Exception):
    """Base class for all package errors."""


class InvalidCodimension(NilcubeError, ValueError):
    pass


class DimensionMismatch(NilcubeError, ValueError):
    pass


class UnsupportedCarrier(NilcubeError, TypeError):
    pass


class GroupAxiomError(NilcubeError, ValueError):
    """A table or rule does not define a group (or a subgroup)."""


class ValueGroupMismatch(NilcubeError, ValueError):
    pass


class WindowViolation(NilcubeError, ValueError):
    """Points handed to a windowed average do not fit in one small ball."""


class NotANilspace(NilcubeError):
    """A structural check needed by a construction failed; carries a witness."""

    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness


class StructureExtractionError(NotANilspace):
    pass


class NotAFactorCube(NilcubeError):
    pass


class CapExceeded(NilcubeError):
    """A size cap was hit; ``partial`` holds whatever was computed so far."""

    def __init__(self, message: str, partial: Any = None) -> None:
        super().__init__(message)
        self.partial = partial


class NotABijection(NilcubeError, ValueError):
    pass


class NotATranslation(NilcubeError):
    pass


class CocycleAxiomError(NilcubeError):
    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness


class SmallnessBudgetExceeded(NilcubeError):
    pass


class InvariantFailure(NilcubeError, AssertionError):
    """An internal invariant of a solver did not hold."""


class PreconditionError(NilcubeError, ValueError):
    pass


@dataclass
class CheckResult:
    """Outcome of a property check.

    ``coverage`` is ``"exhaustive"`` or ``"sampled:<n>"``; ``witness`` is set
    only on failure.
    """

    passed: bool
    witness: Any = None
    detail: str = ""
    coverage: str = "exhaustive"
    counts: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed
