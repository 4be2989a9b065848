"""Exception types raised by the solvers and the ray tracer."""


class ConormalLabError(Exception):
    """Base class for all errors raised by this package."""


class SingularDerivative(ConormalLabError, ValueError):
    """The normal profile derivative is unbounded (or undefined) at the query point."""


class StepUnderflow(ConormalLabError, ArithmeticError):
    """Adaptive step control drove the step size below the floor."""


class NonPropagating(ConormalLabError, ValueError):
    """The energy does not exceed the supremum of the potential."""


class DegenerateIncident(ConormalLabError, ArithmeticError):
    """The solution carries no incident component and cannot be normalised."""


class QuadratureFailure(ConormalLabError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""


class EtaOutOfWindow(ConormalLabError, ValueError):
    """The matching exponent lies outside the admissible open interval."""


class DomainError(ConormalLabError, ValueError):
    """Argument outside the domain of a special function."""


class TangentialIncidence(ConormalLabError, ValueError):
    """Normal momentum too small for a transverse interface crossing."""


class NotHyperbolic(ConormalLabError, ValueError):
    """Branching requested at a boundary point that is not hyperbolic."""


class ConfigError(ConormalLabError, ValueError):
    """Invalid experiment configuration."""
