"""Exception types shared across the package."""


class H22Error(Exception):
    """Base class for every error raised by h22lab."""


class StructureError(H22Error, ValueError):
    """Operands live in incompatible structures (e.g. different site counts)."""


class DomainError(H22Error, ArithmeticError):
    """An operation was applied outside its mathematical domain."""


class PreconditionError(H22Error, ValueError):
    """An input violates a documented precondition."""


class SizeError(H22Error, ValueError):
    """A problem size is outside what an algorithm supports."""


class ConfigError(H22Error, ValueError):
    """A run configuration or input file is malformed."""


class AccuracyError(H22Error, RuntimeError):
    """A numerical routine failed to reach its requested accuracy."""


class LinAlgError(H22Error, ArithmeticError):
    """A required matrix inverse does not exist."""
