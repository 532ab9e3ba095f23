"""Quantum estimation-error bounds in the presence of nuisance parameters."""

from . import bounds, cli, errors, fisher, linalg, metrology, models, povm, validate
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "bounds", "cli", "errors", "fisher", "linalg", "metrology", "models",
    "povm", "validate", "Tolerances", "DEFAULT",
]
__version__ = "0.1.0"
