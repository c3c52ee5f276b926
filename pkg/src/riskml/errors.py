"""Exception types shared across the pipeline stages."""

from __future__ import annotations


class RiskmlError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(RiskmlError):
    """A required column is missing or the header cannot be matched."""


class ParseError(RiskmlError):
    """The raw CSV is structurally malformed (arity, encoding, duplicates)."""


class CleanseError(RiskmlError):
    """Row validation dropped more data than the configured tolerance."""


class ValidationError(RiskmlError):
    """An argument or configuration value is out of its documented range."""


class ConvergenceError(RiskmlError):
    """An iterative solver hit its iteration cap or produced non-finite values."""
