"""Exception types shared across the package."""


class BayesdecideError(Exception):
    """Base class for all package errors."""


class ValidationError(BayesdecideError):
    """Raised when inputs violate a documented invariant or schema."""


class DomainError(BayesdecideError):
    """Raised when a lookup refers to an unknown label (action, state, ...)."""


class InitializationError(BayesdecideError):
    """Raised when a sampler cannot start (e.g. non-finite log posterior)."""
