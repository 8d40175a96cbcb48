"""Shared exception types."""

from __future__ import annotations


class ParseError(ValueError):
    """An input file is malformed; the message carries row/field context."""


class ValidationError(ValueError):
    """A domain invariant does not hold; the message names the offending field."""


class ConfigError(ValueError):
    """A run configuration is missing, malformed, or inconsistent."""


class SolverFailure(RuntimeError):
    """The optimization backend returned a non-usable status."""
