"""Exception types shared across the package.

The CLI maps ValidationError to exit code 2 and CertificationError to exit code 3.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class CertificationError(RuntimeError):
    """A numerical result could not be certified to the requested tolerance."""


class DecodeError(ValidationError):
    """Compressed partition data does not correspond to any path."""


class MalformedCodeError(ValidationError):
    """A code failed to cover a path; carries the uncovered witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class HypothesisViolation(ValidationError):
    """A bound was requested for a tree outside the bound's hypothesis."""
