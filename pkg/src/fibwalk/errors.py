"""Exception taxonomy shared by the library and the command line front end."""


class FibwalkError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class SpecValidationError(FibwalkError, ValueError):
    """A walk specification (or spec document) violates its invariants.

    ``violations`` holds ``(state, constraint, residual)`` triples; ``state``
    is ``None`` for whole-document problems.
    """

    exit_code = 3

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class NotAbsorbingError(FibwalkError, ArithmeticError):
    """The walk is not absorbed almost surely, so the requested quantity diverges."""

    exit_code = 2


class DegenerateSpecError(FibwalkError, ZeroDivisionError):
    """A coefficient derivation needs a division by a zero probability."""

    exit_code = 4


class OffsetRangeError(FibwalkError, IndexError):
    """A coefficient sequence was read at an offset where it is not defined."""

    def __init__(self, sequence, offset, valid_range=None):
        where = f" (defined on {valid_range[0]}..{valid_range[1]})" if valid_range else ""
        super().__init__(f"{sequence}[{offset}] is not defined{where}")
        self.sequence = sequence
        self.offset = offset


class CapacityError(FibwalkError, ValueError):
    """The explicit Fibonacci expansion was asked for an order above its cap."""
