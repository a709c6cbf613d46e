"""Exception and warning types raised by the solvers."""


class ACWaveError(Exception):
    """Base class for all package errors."""


class SizingError(ACWaveError, ValueError):
    """A grid is too coarse or too small for the requested operation."""


class DomainError(ACWaveError, ValueError):
    """Input field violates a precondition (non-finite values, bad support)."""


class RegimeError(ACWaveError, ValueError):
    """The cross section or speed lies outside the regime where solutions exist."""


class IterationLimitError(ACWaveError, RuntimeError):
    """An iterative method hit its iteration budget without converging."""


class LinearSolverError(ACWaveError, RuntimeError):
    """A sparse linear solve failed (singular or non-finite Jacobian)."""


class NoCrossingError(ACWaveError, RuntimeError):
    """The shift matching integral never reaches its target value."""


class SeedFamilyError(ACWaveError, RuntimeError):
    """No amplitude in the sweep makes the trial family strictly negative."""


class IntegrationError(ACWaveError, RuntimeError):
    """Time integration blew up or lost track of the front."""


class PartialResultWarning(UserWarning):
    """An enumeration stopped before reaching its expected count."""
