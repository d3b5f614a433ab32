"""Exception types shared across the package."""


class EscapeSimError(Exception):
    """Base class for all escapesim errors."""


class DegenerateInputError(EscapeSimError, ValueError):
    """Geometric input outside an operation's domain (zero vector, coincident centers)."""


class DomainError(EscapeSimError, ValueError):
    """Numeric argument outside a formula's domain."""


class SolverError(EscapeSimError):
    """A root/constraint solver found no admissible solution."""


class PrecisionError(EscapeSimError):
    """The derived decision period is too small for the active scalar precision."""

    def __init__(self, level, sigma, threshold):
        self.level = level
        self.sigma = sigma
        self.threshold = threshold
        super().__init__(
            f"level {level}: decision period {sigma!r} below the precision guard "
            f"{threshold!r}; rerun with precision='extended'"
        )


class SchedulingError(EscapeSimError):
    """Internal clock bookkeeping bug: a path was queried beyond its committed horizon."""


class CausalityError(EscapeSimError):
    """A component asked for state at a time later than the simulation clock."""


class InvariantViolationError(EscapeSimError):
    """A runtime guarantee the strategy relies on was observed broken."""


class ConfigError(EscapeSimError, ValueError):
    """Invalid run configuration document."""
