"""Desk-scale numerics for spectral certification, spiked Wishart detection,
quiet planting and low-degree likelihood ratios."""

__version__ = "0.1.0"

from .errors import (
    DegenerateInputError,
    DivergenceError,
    DomainError,
    FitFailure,
    HardnessLabError,
    InvalidInputError,
    MethodError,
    PreconditionError,
    SizeLimitError,
)

__all__ = [
    "__version__",
    "DegenerateInputError",
    "DivergenceError",
    "DomainError",
    "FitFailure",
    "HardnessLabError",
    "InvalidInputError",
    "MethodError",
    "PreconditionError",
    "SizeLimitError",
]
