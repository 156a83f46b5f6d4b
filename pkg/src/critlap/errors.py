"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class CritlapError(Exception):
    """Base class for every error raised by the package."""


class DomainError(CritlapError, ValueError):
    """Invalid geometry or parameters outside an operation's domain."""


class AsymmetricCoefficient(CritlapError):
    """The coefficient matrix is not symmetric to tolerance."""


class NotUniformlyElliptic(CritlapError):
    """The coefficient matrix has a non-positive eigenvalue at some sample."""


class DifferentiationUnavailable(CritlapError):
    """A derivative field cannot be formed for the given coefficient."""


class NoGoodDirection(CritlapError):
    """Every located maximiser of G has F <= 0."""


class NoPositiveDirection(CritlapError):
    """F has no direction of positivity, so no bump with positive integral exists."""


class ConstraintInfeasible(CritlapError):
    """The constraint set of a minimisation problem is empty."""


class NoConvergence(CritlapError):
    """An iterative method hit its iteration budget."""


class QuadratureFailure(CritlapError):
    """Adaptive quadrature did not reach the requested accuracy."""


class FitFailure(CritlapError):
    """A regression over an epsilon sweep has residuals above threshold."""


class NotCoercive(CritlapError):
    """The energy is not coercive on the product space."""


class NoFeasibleInit(CritlapError):
    """No initial field has a positive G-integral."""


class SupportOverflow(CritlapError):
    """A test function's support leaves the domain."""


class EmptySigmaInterval(CritlapError):
    """The admissible interval for the bubble scale exponent is empty."""


class ResidualTooLarge(CritlapError):
    """A rescaled minimiser fails the discrete equation residual check."""


class BFieldUnavailable(CritlapError):
    """The derivative field B(x) is not available for the coefficient."""


class ChecklistFailure(CritlapError):
    """A theorem hypothesis failed; ``hypothesis`` names it."""

    def __init__(self, hypothesis: str, detail: str = "") -> None:
        self.hypothesis = hypothesis
        self.detail = detail
        msg = hypothesis if not detail else f"{hypothesis}: {detail}"
        super().__init__(msg)


class Inconsistent(CritlapError):
    """Two computed bounds contradict each other."""


class ConfigInvalid(CritlapError, ValueError):
    """A run configuration failed validation; ``field`` names the block."""

    def __init__(self, field: str, detail: str) -> None:
        self.field = field
        self.detail = detail
        super().__init__(f"{field}: {detail}")


class UnknownSuite(CritlapError, KeyError):
    """The requested reproduction suite does not exist."""
