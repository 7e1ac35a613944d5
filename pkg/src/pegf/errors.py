"""Exception hierarchy shared by every module."""

from __future__ import annotations


class PegfError(Exception):
    """Base class for domain errors raised by the package."""


class OutOfSupport(PegfError, ValueError):
    """A point lies outside the open interior where the quantity is defined."""


class NotIntegrable(PegfError, ArithmeticError):
    """The integrand diverges non-integrably at the lower support endpoint."""


class Unsupported(PegfError, NotImplementedError):
    """The operation has no implementation for this distribution family."""


class QuadratureFailure(PegfError, ArithmeticError):
    """Adaptive quadrature exhausted its budget before meeting tolerance."""

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message} (estimate={estimate!r}, error_bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class NoPositiveRoot(PegfError, ArithmeticError):
    """The reversed-hazard equation has no positive solution."""


class ConvergenceFailure(PegfError, ArithmeticError):
    """An iterative solver ran out of iterations."""


class GridTooCoarse(PegfError, ValueError):
    """Too few grid points for the requested operation."""


class DegenerateSample(PegfError, ValueError):
    """The sample has zero spread or too few observations."""


class OutOfRange(PegfError, ValueError):
    """Sample values fall outside the range required by the model."""
