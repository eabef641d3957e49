"""Exception hierarchy shared across the package."""


class CombNoiseError(Exception):
    """Base class for all errors raised by combnoise."""


class DomainError(CombNoiseError, ValueError):
    """An input lies outside the physically or mathematically valid domain."""


class ContractError(CombNoiseError, ValueError):
    """An API contract was violated (mismatched shapes, incompatible objects)."""


class NumericError(CombNoiseError, RuntimeError):
    """A numerical procedure failed to converge or produced an invalid result."""
