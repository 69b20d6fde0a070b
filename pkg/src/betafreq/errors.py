"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures to
the documented process exit status without a lookup table.
"""

from __future__ import annotations


class BetaFreqError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(BetaFreqError, ValueError):
    """Input rejected before any computation started."""

    exit_code = 2


class PrecisionError(BetaFreqError, ArithmeticError):
    """A certified decision could not be reached within the precision budget."""

    exit_code = 3


class InfeasibleError(BetaFreqError):
    """The request is well formed but no construction exists for it."""

    exit_code = 4


class NoSignChange(ValidationError):
    """The polynomial has no sign-changing root in the search interval."""


class MultipleSignChanges(ValidationError):
    """More than one root was found; ``evidence`` lists isolating subintervals."""

    def __init__(self, message: str, evidence=()):
        super().__init__(message)
        self.evidence = tuple(evidence)


class PrecisionExhausted(PrecisionError):
    """Escalation reached the precision cap without deciding."""


class PrecisionBudgetExceeded(PrecisionError):
    """The requested depth needs more precision than the configured budget."""


class DomainError(ValidationError):
    """Argument outside the domain of a formula."""


class HypothesisViolated(ValidationError):
    """A theorem hypothesis (typically beta < beta_n) does not hold."""


class NotInSimplex(ValidationError):
    """Frequency vector outside the truncated simplex."""


class ParseError(ValidationError):
    """Malformed artifact or command-line value."""


class InclusionViolated(InfeasibleError):
    """A required strict interval inclusion failed."""

    def __init__(self, message: str, failures=()):
        super().__init__(message)
        self.failures = tuple(failures)


class NotReachableWithinCutoff(InfeasibleError):
    """No connector word exists up to the length cutoff."""


class Diverged(InfeasibleError):
    """An iterated map left the admissible interval before hitting its target."""


class InfeasibleTargets(InfeasibleError):
    """Oscillation targets cannot be placed inside the truncated simplex."""
