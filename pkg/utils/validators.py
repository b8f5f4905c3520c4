"""
Input validation utilities and the error hierarchy of the gripper simulator
"""
import math
from typing import Any, Iterable, Optional


class ValidationError(Exception):
    """Custom exception for validation errors"""
    pass


class RangeError(ValidationError):
    """A value lies outside its physical range (pressure, actuator length)"""
    pass


class SetpointError(ValidationError):
    """A controller setpoint lies outside the calibration range"""
    pass


class ParameterError(ValidationError):
    """An algorithm parameter is invalid (even kernel, non-positive threshold)"""
    pass


class EmptyInputError(ValidationError):
    """An operation received an empty series"""
    pass


class CatalogError(ValidationError):
    """Unknown object or configuration name"""
    pass


class ConfigError(ValidationError):
    """Unknown or invalid configuration key"""
    pass


class InfeasibleGeometryError(ValidationError):
    """Side lengths or diagonal cannot close a convex quadrilateral"""

    def __init__(self, message: str, constraint: str = ""):
        super().__init__(message)
        self.constraint = constraint


class DegenerateGeometryError(ValidationError):
    """Collinear or coincident vertices"""
    pass


class TraceParseError(ValidationError):
    """Malformed CSV input; line_number is 1-based and counts the header"""

    def __init__(self, message: str, line_number: int = 0):
        super().__init__(f"line {line_number}: {message}" if line_number else message)
        self.line_number = line_number


def validate_float(value: Any, field_name: str, min_value: float = None, max_value: float = None,
                   error_cls: type = ValidationError) -> float:
    """
    Validate and convert to float

    Args:
        value: Value to validate
        field_name: Name of the field for error messages
        min_value: Minimum value, inclusive (optional)
        max_value: Maximum value, inclusive (optional)
        error_cls: ValidationError subclass to raise

    Returns:
        Float value

    Raises:
        ValidationError: If value cannot be converted, is not finite or is out of range
    """
    if value is None or value == "" or isinstance(value, bool):
        raise error_cls(f"{field_name} must be a valid number")

    try:
        float_value = float(value)
    except (ValueError, TypeError):
        raise error_cls(f"{field_name} must be a valid number")

    if not math.isfinite(float_value):
        raise error_cls(f"{field_name} must be finite")

    if min_value is not None and float_value < min_value:
        raise error_cls(f"{field_name} must be at least {min_value}")

    if max_value is not None and float_value > max_value:
        raise error_cls(f"{field_name} must be no more than {max_value}")

    return float_value


def validate_positive(value: Any, field_name: str, error_cls: type = ValidationError) -> float:
    """Validate a strictly positive finite number."""
    float_value = validate_float(value, field_name, error_cls=error_cls)
    if float_value <= 0:
        raise error_cls(f"{field_name} must be positive")
    return float_value


def validate_integer(value: Any, field_name: str, min_value: int = None, max_value: int = None,
                     error_cls: type = ValidationError) -> int:
    """
    Validate and convert to integer

    Args:
        value: Value to validate
        field_name: Name of the field for error messages
        min_value: Minimum value (optional)
        max_value: Maximum value (optional)
        error_cls: ValidationError subclass to raise

    Returns:
        Integer value

    Raises:
        ValidationError: If value cannot be converted or is out of range
    """
    if value is None or value == "" or isinstance(value, bool):
        raise error_cls(f"{field_name} must be a valid integer")

    if isinstance(value, float) and not value.is_integer():
        raise error_cls(f"{field_name} must be a valid integer")

    try:
        int_value = int(value)
    except (ValueError, TypeError):
        raise error_cls(f"{field_name} must be a valid integer")

    if min_value is not None and int_value < min_value:
        raise error_cls(f"{field_name} must be at least {min_value}")

    if max_value is not None and int_value > max_value:
        raise error_cls(f"{field_name} must be no more than {max_value}")

    return int_value


def validate_odd_kernel(k: Any, field_name: str = "Kernel size") -> int:
    """Median kernels must be odd and at least 1."""
    k = validate_integer(k, field_name, min_value=1, error_cls=ParameterError)
    if k % 2 == 0:
        raise ParameterError(f"{field_name} must be odd, got {k}")
    return k


def validate_choice(value: Any, field_name: str, choices: Iterable[str]) -> str:
    """
    Validate that a string is one of the allowed choices (case-insensitive)

    Returns:
        The matching choice, in its canonical spelling

    Raises:
        ValidationError: If value matches none of the choices
    """
    choices = list(choices)
    text = str(value).strip() if value is not None else ""
    for choice in choices:
        if text.lower() == choice.lower():
            return choice
    raise ValidationError(f"{field_name} must be one of {', '.join(choices)}; got '{text}'")


def validate_seed(value: Any, field_name: str = "Seed") -> Optional[int]:
    """Seeds are unsigned 64-bit integers; None means unseeded."""
    if value is None:
        return None
    return validate_integer(value, field_name, min_value=0, max_value=2 ** 64 - 1)
