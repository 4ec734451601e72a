"""Flame fronts in a channel: spectral evolution, steady states, stability and pole dynamics."""
from .errors import (
    BlowUpError,
    CollisionError,
    ConfigError,
    DivergenceError,
    FlameFrontError,
    GridMismatchError,
    NoBranchError,
    OpenOrbitError,
    UnsupportedParameterError,
    WindowError,
)
from .spectral import GridSpec, SpectralField

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "CollisionError",
    "ConfigError",
    "DivergenceError",
    "FlameFrontError",
    "GridMismatchError",
    "GridSpec",
    "NoBranchError",
    "OpenOrbitError",
    "SpectralField",
    "UnsupportedParameterError",
    "WindowError",
    "__version__",
]
