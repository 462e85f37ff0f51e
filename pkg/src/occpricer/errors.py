"""Exception hierarchy.

Everything numerical derives from :class:`NumericalError` so the CLI can map
it to exit code 2; parameter and precondition problems derive from
:class:`ValidationError` (exit code 1).
"""


class OccPricerError(Exception):
    """Base class for all package errors."""


class ValidationError(OccPricerError, ValueError):
    """Invalid parameters or violated preconditions."""


class DomainError(ValidationError):
    """Arguments outside the region where a transform is defined."""


class BarrierOrder(ValidationError):
    """Lower barrier not strictly below the upper barrier."""


class MgfDivergence(ValidationError):
    """E[exp(Y)] is infinite (eta_1 <= 1)."""


class NumericalError(OccPricerError, ArithmeticError):
    """A numerical routine could not produce a trustworthy answer."""


class PoleEvaluation(NumericalError):
    """Levy exponent evaluated at (or numerically on top of) a pole."""


class DegenerateLeadingCoefficient(NumericalError):
    """The cleared characteristic polynomial lost its top degree."""


class RootCountMismatch(NumericalError):
    """Root partition differs from (m+1, n+1); the root assumption fails."""


class ConvergenceFailure(NumericalError):
    """Newton polishing stalled above the residual target."""


class SingularSystem(NumericalError):
    """Linear system too ill-conditioned to trust."""


class NonConvergence(NumericalError):
    """Transform inversion tail did not settle."""


class RejectionStall(NumericalError):
    """Acceptance-rejection sampler exceeded its attempt cap."""
