class FWCIError(Exception):
    """Base class for all package errors."""


class DomainError(FWCIError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class InsufficientDataError(FWCIError, ValueError):
    pass


class ConfigError(FWCIError, ValueError):
    pass


class SamplerError(FWCIError, RuntimeError):
    """The sampler produced a non-finite or malformed draw."""
