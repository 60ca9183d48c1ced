"""Exception and warning types shared across the package."""


class LabError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(LabError, ValueError):
    """A scalar or structural parameter is outside its allowed range."""


class ShapeError(LabError, ValueError):
    """Array dimensions do not match."""


class DomainError(LabError, ValueError):
    """A scalar function is undefined at an eigenvalue."""


class ConditioningError(LabError, ArithmeticError):
    """A matrix is too ill-conditioned for the requested operation."""


class QdbViolationError(LabError):
    """Detailed balance does not hold for the supplied generator."""


class StructureViolationError(LabError):
    """A structural identity of the generator failed.

    :param item: short name of the failed check
    :param residual: the residual that exceeded the threshold
    """

    def __init__(self, item, residual):
        self.item = item
        self.residual = residual
        super().__init__(f"structure-violation in check {item!r}: residual {residual:.3e}")


class InsufficientJumpsError(InvalidParameterError):
    """Too few jump operators for the frequency labelling."""

    def __init__(self, m, minimum):
        self.m = m
        self.minimum = minimum
        super().__init__(f"m={m} jump operators is too small; at least {minimum} are required")


class ConditionAViolationError(LabError):
    """Gibbs eigenvalue ratios collide, so the synthesis cannot proceed."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(
            f"eigenvalue ratios are not distinct; {len(self.violations)} colliding index pairs, "
            f"first {self.violations[:3]}"
        )


class InternalError(LabError, RuntimeError):
    """An internal consistency check failed."""


class RankAmbiguityWarning(UserWarning):
    """A singular value sits inside the rank-decision ambiguity band."""


class StabilityWarning(UserWarning):
    """The requested step size is large compared to the dissipation rate."""
