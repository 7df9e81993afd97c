"""Exception types shared across the package."""


class CoincidiaError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(CoincidiaError):
    """A precondition on arguments or problem setup was violated."""


class DomainError(CoincidiaError, ValueError):
    """A numeric argument lies outside the mathematical domain of an operation."""


class BracketingError(CoincidiaError):
    """A root bracket does not enclose the requested target value."""


class RangeError(CoincidiaError):
    """A requested value is outside the reachable range of a map."""


class NumericError(CoincidiaError):
    """A computation produced non-finite values or failed to converge."""


class CertificateError(CoincidiaError):
    """A contraction or hypothesis certificate required for a solve failed."""
