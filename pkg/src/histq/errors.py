"""Exception hierarchy shared by the engine, the scenario language and the CLI."""

from __future__ import annotations


class HistqError(Exception):
    """Base class for every error raised by histq."""


class DimensionMismatch(HistqError, ValueError):
    pass


class NotSquare(HistqError, ValueError):
    pass


class NotHermitian(HistqError, ValueError):
    def __init__(self, asymmetry: float):
        super().__init__(f"matrix is not Hermitian (max |m - m^dagger| = {asymmetry:.3e})")
        self.asymmetry = asymmetry


class NumericalFailure(HistqError, ArithmeticError):
    pass


class ShapeError(HistqError, ValueError):
    pass


class ValidationFailure(HistqError, ValueError):
    """Raised when a candidate PDI, POVM, isometry, ... violates a defining identity.

    The ``report`` attribute carries the structured :class:`~histq.objects.ValidationReport`.
    """

    def __init__(self, report):
        super().__init__(str(report))
        self.report = report


class InconsistentFamily(HistqError):
    def __init__(self, report):
        super().__init__(
            f"family is inconsistent: max off-diagonal {report.max_off_diagonal:.3e} "
            f"for pair {report.worst_pair}"
        )
        self.report = report


class ZeroConditioningEvent(HistqError, ZeroDivisionError):
    pass


class UnknownOutcome(HistqError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else "unknown outcome"


class NonOrthonormalBasis(HistqError, ValueError):
    pass


class PointerMismatch(HistqError, ValueError):
    def __init__(self, state_index: int, pointer_label: str, magnitude: float):
        super().__init__(
            f"pointer state {state_index} is not inside pointer subspace "
            f"{pointer_label!r} as required (deviation {magnitude:.3e})"
        )
        self.state_index = state_index
        self.pointer_label = pointer_label
        self.magnitude = magnitude


class ClosureViolation(HistqError, ValueError):
    def __init__(self, deficit: float):
        super().__init__(f"Kraus operators do not satisfy sum K^dagger K = I (max deviation {deficit:.3e})")
        self.deficit = deficit


class ProbabilityDeficit(HistqError, ValueError):
    pass


class CoarseGrainMismatch(HistqError, ValueError):
    pass
