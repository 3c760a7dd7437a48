"""Exception hierarchy.

Validation problems derive from :class:`ValueError` so callers that only care
about bad input can catch the builtin. Numerical-quality failures have their
own branch because the CLI maps them to a distinct exit code.
"""


class GaussbathError(Exception):
    """Base class for all package errors."""


class ValidationError(GaussbathError, ValueError):
    """Input violates a documented precondition."""


class InvalidDimensionError(ValidationError):
    pass


class InvalidStateError(ValidationError):
    """Covariance matrix violates the uncertainty principle or symmetry."""


class InvalidProfileError(ValidationError):
    pass


class InstabilityError(ValidationError):
    """Quadratic form is not positive definite (no ground state)."""


class ConfigError(ValidationError):
    pass


class NumericalError(GaussbathError, ArithmeticError):
    """Base class for numerical-quality failures."""


class StepSizeError(NumericalError):
    """Symplectic defect grew past the abort threshold."""


class NumericalOverflowError(NumericalError):
    pass


class NumericalQualityError(NumericalError):
    pass


class OracleInvalidError(NumericalError):
    """Fock cutoff is too small for the requested run."""
