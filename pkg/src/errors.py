# src/errors.py
"""
Exception hierarchy shared by every module.

The CLI maps ConfigError, DomainError, ShapeError and LatticeExtentError to
exit code 2 and every other SimulationError to exit code 3.
"""


class SimulationError(Exception):
    """Root of all errors raised by the simulator."""


class ConfigError(SimulationError, ValueError):
    """Invalid or missing configuration value. Messages name the offending key."""


class DomainError(SimulationError, ValueError):
    """A physical argument outside its domain (T <= 0, non-half-integer spin, ...)."""


class ShapeError(SimulationError, ValueError):
    """Operator or array dimensions do not match."""


class LatticeExtentError(ConfigError):
    """The generated lattice is too small for the requested selection."""


class SingularityError(SimulationError):
    """A site sits on the vacancy or two sites coincide."""


class ResourceError(SimulationError):
    """Hilbert-space dimension or memory guard exceeded."""


class NumericalError(SimulationError):
    """Quadrature, root finding or integration did not converge."""


class FitError(SimulationError):
    """Not enough decaying points to fit a decoherence function."""


VALIDATION_ERRORS = (ConfigError, DomainError, ShapeError)


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, VALIDATION_ERRORS):
        return 2
    if isinstance(exc, SimulationError):
        return 3
    return 1
