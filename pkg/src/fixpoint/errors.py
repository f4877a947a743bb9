"""Exception types raised by the toolkit."""


class FixpointError(Exception):
    """Base class for all toolkit errors."""


class StructureError(FixpointError, TypeError):
    """A point does not match the structure of the space it is used with."""


class DomainError(FixpointError, ValueError):
    """A point lies outside the domain of a mapping."""


class SamplerError(FixpointError, ValueError):
    """The requested radius band holds no points of the space."""


class DerivationError(FixpointError, ValueError):
    """A parameter derivation could not be carried out."""


class UnknownMappingError(FixpointError, KeyError):
    pass


class ConvergenceError(FixpointError, RuntimeError):
    """An inner iteration ran out of budget. The partial trace is attached."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
