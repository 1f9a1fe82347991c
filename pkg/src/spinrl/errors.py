"""Exception types shared across the simulator, environment and trainer."""


class SpinRLError(Exception):
    """Base class for all package errors."""


class DomainError(SpinRLError, ArithmeticError):
    """A trigonometric divisor in the equations of motion vanished."""


class NumericalError(SpinRLError, ArithmeticError):
    """A computation produced a non-finite value."""


class ConfigError(SpinRLError, ValueError):
    """A configuration file or object failed validation."""


class LengthMismatch(SpinRLError, ValueError):
    pass


class ShapeMismatch(SpinRLError, ValueError):
    pass


class IncompatibleCheckpoint(SpinRLError, ValueError):
    pass
