"""
Exception hierarchy shared by models, analysis and the CLI.
"""


class PPPKitError(Exception):
    """Base class for all pppkit errors."""


class DomainError(PPPKitError, ValueError):
    """An argument lies outside the domain of an operation (negative distance, k not in {1,2,3}...)."""


class ModelValidationError(PPPKitError, ValueError):
    """A model violates its invariants, or one of its Campbell integrals diverges."""


class QuadratureError(ModelValidationError):
    """Adaptive quadrature did not converge to a finite value."""


class UnsupportedOperationError(PPPKitError, NotImplementedError):
    """The model cannot support the requested operation (e.g. sampling moments-only fading)."""
