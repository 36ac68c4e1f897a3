"""Exact superalgebra and numerical checks for the H^{2|2} hyperbolic sigma model."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AccuracyError,
    ConfigError,
    DomainError,
    H22Error,
    LinAlgError,
    PreconditionError,
    SizeError,
    StructureError,
)
from .graph import RootedGraph  # noqa: E402
from .superalgebra import Superalgebra, SuperNumber  # noqa: E402

__all__ = [
    "AccuracyError",
    "ConfigError",
    "DomainError",
    "H22Error",
    "LinAlgError",
    "PreconditionError",
    "RootedGraph",
    "SizeError",
    "StructureError",
    "SuperNumber",
    "Superalgebra",
    "__version__",
]
