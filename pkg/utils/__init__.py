"""
Utility modules for the morphing gripper simulator
"""
from .logger import get_logger, setup_logger
from .validators import (
    ValidationError,
    RangeError,
    SetpointError,
    ParameterError,
    EmptyInputError,
    CatalogError,
    ConfigError,
    InfeasibleGeometryError,
    DegenerateGeometryError,
    TraceParseError,
    validate_float,
    validate_positive,
    validate_integer,
    validate_odd_kernel,
    validate_choice,
    validate_seed,
)

__all__ = [
    'get_logger',
    'setup_logger',
    'ValidationError',
    'RangeError',
    'SetpointError',
    'ParameterError',
    'EmptyInputError',
    'CatalogError',
    'ConfigError',
    'InfeasibleGeometryError',
    'DegenerateGeometryError',
    'TraceParseError',
    'validate_float',
    'validate_positive',
    'validate_integer',
    'validate_odd_kernel',
    'validate_choice',
    'validate_seed',
]
