"""Compilation, resource estimation and desk-scale verification of Trotterized vibronic dynamics."""

from .errors import CompileError, FitError, ModelError, SizeCapError
from .grid import GridConfig
from .model import MultiIndex, VibronicModel, load_model, parse_model, serialize_model, validate_model

__all__ = [
    "CompileError",
    "FitError",
    "GridConfig",
    "ModelError",
    "MultiIndex",
    "SizeCapError",
    "VibronicModel",
    "load_model",
    "parse_model",
    "serialize_model",
    "validate_model",
]
__version__ = "0.1.0"
