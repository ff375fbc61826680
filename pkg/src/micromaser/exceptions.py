"""Exception types raised by the simulator."""


class MicromaserError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(MicromaserError, ValueError):
    pass


class DimensionMismatchError(MicromaserError, ValueError):
    pass


class TruncationError(MicromaserError, RuntimeError):
    """Discarding Fock levels would throw away too much weight."""


class StiffnessError(MicromaserError, RuntimeError):
    """Fixed-step integration requested outside its stability budget."""


class UndefinedObservableError(MicromaserError, ValueError):
    pass


class InsufficientDataError(MicromaserError, ValueError):
    pass


class InvalidStateError(MicromaserError, RuntimeError):
    """A density matrix failed validation during a run."""
