"""Exception hierarchy.

The CLI maps :class:`InputError` subclasses to exit code 2 and every other
:class:`ErangeError` to exit code 1.
"""
from __future__ import annotations


class ErangeError(Exception):
    """Base class for all library errors."""


class InputError(ErangeError):
    """The request itself is invalid (bad domain, unmet precondition)."""


class DomainError(InputError, ValueError):
    pass


class PreconditionError(InputError):
    pass


class IndeterminateError(InputError):
    """Tail behaviour is unknown, so finiteness cannot be decided analytically."""


class ConfigError(InputError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class IterationError(ErangeError):
    """Fixed-point iteration did not converge."""


class ConsistencyError(ErangeError):
    """Two routes to the same quantity disagree beyond tolerance."""


class ResonanceError(ErangeError):
    """A zero-energy resonance (or zero-energy bound state) was detected."""


class NumericError(ErangeError):
    pass
