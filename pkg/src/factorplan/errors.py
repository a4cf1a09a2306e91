"""Exception types shared across the package.

The CLI maps these onto exit codes: validation/parse problems exit 2,
I/O problems exit 3, numeric failures exit 4.
"""


class FactorPlanError(Exception):
    """Base class for all package errors."""


class CatalogError(FactorPlanError):
    """Malformed or inconsistent factor catalog."""


class SurveyFormatError(FactorPlanError):
    """Survey CSV cannot be parsed at all (missing columns, bad stream)."""


class ValidationError(FactorPlanError):
    """Structurally valid input violating a domain constraint."""


class SynthesisError(ValidationError):
    """Synthetic-data targets that cannot be met on the 1..9 scale."""


class ScopeError(ValidationError):
    """Allocation/scope mismatch or an oversized exhaustive-search scope."""


class TrainingError(FactorPlanError):
    """Numeric failure while fitting a model (divergence, non-finite loss)."""
