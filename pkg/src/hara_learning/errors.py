"""Exception types shared across the package."""


class HaraError(Exception):
    """Base class for all library errors."""


class PriorError(HaraError, ValueError):
    """Invalid prior specification (weights, support, parameters)."""


class IntegrandError(HaraError, ValueError):
    """An integrand returned a non-finite value at a quadrature node."""


class QuadratureError(HaraError, ArithmeticError):
    """A quadrature rule failed to converge or was asked for a degenerate kernel."""


class DivergenceError(HaraError, ArithmeticError):
    """The control problem has no finite solution for this prior and gamma."""


class DomainError(HaraError, ValueError):
    """Wealth lies outside the domain of the utility function."""


class ConfigError(HaraError, ValueError):
    """Run configuration could not be parsed or validated."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
