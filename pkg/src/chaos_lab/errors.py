"""Exception hierarchy shared by all chaos_lab modules."""


class ChaosLabError(Exception):
    """Base class for every error raised by the package."""


class DomainError(ChaosLabError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ConfigurationError(ChaosLabError, ValueError):
    """A run configuration violates a precondition (step size, caps, ...)."""


class IntegrationError(ChaosLabError, ArithmeticError):
    """Time integration drifted beyond its conservation tolerance."""


class NumericError(ChaosLabError, ArithmeticError):
    """Quadrature or root finding did not converge."""


class DegeneracyError(ChaosLabError, ArithmeticError):
    """Repeated rates make the bidiagonal spectrum non-simple."""


class FitError(ChaosLabError, ValueError):
    """A fit window contains too few points."""
