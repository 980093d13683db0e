"""Exception hierarchy shared by every module.

The CLI maps ``ValidationError`` (and ``DomainError``) to exit code 2 and
``NumericalError`` to exit code 3.
"""


class ZitterguideError(Exception):
    """Base class for all package errors."""


class DomainError(ZitterguideError, ValueError):
    """An argument lies outside the domain of a function."""


class ValidationError(ZitterguideError, ValueError):
    """A configuration, profile or scenario violates its invariants."""


class NotGuidedError(ValidationError):
    """The requested mode is not transversely bound at this normalized frequency."""


class ScopeError(ValidationError):
    """The request is outside what first-order theory covers (photon |m_ell| = 1)."""


class NumericalError(ZitterguideError, ArithmeticError):
    """A numerical procedure failed or is ill-conditioned."""


class InconsistentRootError(NumericalError):
    """A characteristic-equation root failed the normalization positivity test."""


class IllConditionedError(NumericalError):
    """A perturbative denominator is too close to zero."""
