"""Exceptions raised by the Rivlin cube modules."""


class CubeError(Exception):
    """Base class for every error raised by this project."""


class InvalidModelError(CubeError, ValueError):
    """Material coefficients outside the admissible set (mu <= 0 or mu1 <= 0)."""


class InvalidStretchError(CubeError, ValueError):
    """Stretch triple with a non-positive entry or a volume change."""


class DomainError(CubeError, ValueError):
    """Argument outside the domain of the requested operation."""


class RegimeError(CubeError):
    """Operation called for a material regime it does not cover."""


class InconsistentEquilibriumError(CubeError):
    """Stretches and load do not satisfy the equilibrium equations."""


class InfeasibleMomentsError(CubeError, ValueError):
    """No distribution of the requested family has the given moments."""


class SimulationInterrupted(CubeError):
    """A Monte Carlo run was cancelled before every row finished."""


class UsageError(CubeError):
    """Bad command-line flags or configuration file keys."""
