"""Exception and warning types shared across the package."""


class FracHestonError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(FracHestonError, ValueError):
    """Invalid input value. Carries the offending field name when known."""

    def __init__(self, field, message=None):
        self.field = field
        super().__init__(message or f"invalid value for '{field}'")


class OutOfRangeError(ParameterError):
    """A numeric input violates its admissible range."""

    def __init__(self, field, message=None):
        super().__init__(field, message or f"'{field}' out of admissible range")


class NonFiniteError(ParameterError):
    """A numeric input is NaN or infinite."""

    def __init__(self, field, message=None):
        super().__init__(field, message or f"'{field}' must be finite")


class PoleProximityError(FracHestonError):
    """Evaluation requested too close to a pole of a closed-form expression."""


class QuadratureFailureError(FracHestonError):
    """Adaptive refinement exhausted its node budget without meeting tolerance."""


class OutsideDomainError(FracHestonError):
    """Transform argument lies outside the effective domain (moment explosion)."""


class GridMismatchError(FracHestonError):
    """A time grid does not line up with the requested evaluation time."""


class NoSolutionError(FracHestonError):
    """Implied-volatility inversion has no root inside the arbitrage bounds."""


class HorizonTooShortError(FracHestonError):
    """Moment-domain bisection could not classify points at the given horizon."""


class NearBoundWarning(UserWarning):
    """Advisory: a price sits within 1e-12 of a static no-arbitrage bound."""


class NonConvexWarning(UserWarning):
    """Advisory: a function assumed convex failed a three-point convexity probe."""
