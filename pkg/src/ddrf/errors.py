"""Exception hierarchy shared across the package.

Every failure mode that callers are expected to handle gets its own class;
generic programming errors keep raising the builtin exceptions.
"""


class DdrfError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDomainError(DdrfError):
    """An input violates a documented precondition (bad range, bad sign)."""


class ShapeMismatchError(DdrfError):
    """Array-valued input has the wrong length or shape for the grid."""


class NumericalFailureError(DdrfError):
    """A dense solver failed to converge or produced an invalid result."""


class NotPositiveSemidefiniteError(DdrfError):
    """A kernel that must be PSD has an eigenvalue below the tolerance."""


class DegenerateFermiLevelError(DdrfError):
    """Occupied/virtual split falls inside a degenerate level."""


class DegenerateGroundStateError(DdrfError):
    """Many-body ground state is not separated from the first excited state."""


class AtPoleError(DdrfError):
    """Frequency-domain evaluation requested too close to a pole."""


class MemoryBudgetError(DdrfError):
    """Two-particle sector dimension exceeds the configured cap."""


class StepTooLargeError(DdrfError):
    """Propagation time step does not resolve the retained spectrum."""


class IllConditionedStepError(DdrfError):
    """Implicit factor of a time-marching step is numerically singular."""


class NoContractionError(DdrfError):
    """Picard window cannot be shrunk enough to guarantee contraction."""


class TailNotDampedError(DdrfError):
    """Fourier transform requested at Im(z) too small for the series horizon."""


class IntervalContainsPoleError(DdrfError):
    """An eigencurve scan interval is not excitation free."""


class BisectionLimitError(DdrfError):
    """Bisection did not reach the requested tolerance within the iteration cap."""


class ContourHitsPoleError(DdrfError):
    """A quadrature node of a contour integral sits on (or too near) a pole."""


class QuadratureNotConvergedError(DdrfError):
    """Doubling the contour quadrature order still changes the result."""


class SingularResolventError(DdrfError):
    """(1 - chi_s(z)) is numerically singular at the requested point."""


class ConfigError(DdrfError):
    """Run configuration is malformed; `field` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")
