"""Exception types shared across the package."""


class OhlcBridgeError(Exception):
    """Base class for every error this package raises deliberately."""


class DomainError(OhlcBridgeError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class TruncationError(OhlcBridgeError):
    """A series did not converge within its term budget.

    Carries the magnitude of the last term evaluated and the number of
    terms consumed, so callers can decide whether to retry with a larger
    budget or give up.
    """

    def __init__(self, message, last_term=None, terms_used=None):
        super().__init__(message)
        self.last_term = last_term
        self.terms_used = terms_used


class NumericError(OhlcBridgeError):
    """A numerical routine could not reach the requested accuracy."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class DensityUnderflowError(NumericError):
    """A joint density underflowed: the statistic is too extreme to condition on."""


class BracketError(OhlcBridgeError):
    """An optimizer found no interior optimum inside its bracket.

    ``boundary_values`` holds the objective at the two bracket ends.
    """

    def __init__(self, message, boundary_values=None):
        super().__init__(message)
        self.boundary_values = boundary_values


class CapacityError(OhlcBridgeError, MemoryError):
    """A simulation request exceeds the configured memory budget."""

    def __init__(self, message, required_bytes=None):
        super().__init__(message)
        self.required_bytes = required_bytes


class DegenerateBarError(OhlcBridgeError):
    """A bar's geometry admits no estimate for the requested method."""


class GapError(OhlcBridgeError):
    """Missing values where a complete grid is required; nothing is imputed."""


class ScoreUndefinedError(OhlcBridgeError):
    """A score's normalizing denominator vanished."""


class DataError(OhlcBridgeError):
    """An input row failed validation; ``line`` is the 1-based source line."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line

    def __str__(self):
        base = super().__str__()
        return base if self.line is None else f"{base} (line {self.line})"
