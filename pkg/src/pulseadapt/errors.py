"""Exception types shared across the package."""


class PulseAdaptError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(PulseAdaptError, ValueError):
    """An argument violates a documented precondition."""


class InvalidDataError(PulseAdaptError, ValueError):
    """Input data is malformed: non-finite, unnormalized, or missing labels."""


class InvalidStateError(PulseAdaptError, RuntimeError):
    """An operation was invoked in a state that does not allow it."""


class NumericsError(PulseAdaptError, ArithmeticError):
    """A computation produced non-finite values."""


class FormatError(PulseAdaptError, ValueError):
    """A serialized artifact has a bad magic, version, or checksum."""
