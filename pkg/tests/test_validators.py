"""
Unit tests for input validators
"""
import unittest
from utils.validators import (
    ValidationError,
    RangeError,
    ParameterError,
    ConfigError,
    InfeasibleGeometryError,
    TraceParseError,
    validate_float,
    validate_positive,
    validate_integer,
    validate_odd_kernel,
    validate_choice,
    validate_seed,
)


class TestValidators(unittest.TestCase):
    """Test cases for validation functions"""

    def test_validate_float_valid(self):
        """Test validate_float with valid float"""
        self.assertEqual(validate_float("3.14", "Test"), 3.14)

    def test_validate_float_invalid(self):
        """Test validate_float with invalid input"""
        with self.assertRaises(ValidationError):
            validate_float("abc", "Test")

    def test_validate_float_rejects_nan(self):
        """Test validate_float rejects non-finite values"""
        with self.assertRaises(ValidationError):
            validate_float(float("nan"), "Test")

    def test_validate_float_range(self):
        """Test validate_float with range constraints"""
        self.assertEqual(validate_float(5.5, "Test", min_value=1.0, max_value=10.0), 5.5)
        with self.assertRaises(ValidationError):
            validate_float(0.5, "Test", min_value=1.0)
        with self.assertRaises(ValidationError):
            validate_float(15.0, "Test", max_value=10.0)

    def test_validate_float_custom_error(self):
        """Test validate_float raises the requested subclass"""
        with self.assertRaises(RangeError):
            validate_float(-1, "Pressure", min_value=0.0, error_cls=RangeError)

    def test_validate_positive(self):
        """Test validate_positive rejects zero"""
        self.assertEqual(validate_positive(2, "Threshold"), 2.0)
        with self.assertRaises(ValidationError):
            validate_positive(0, "Threshold")

    def test_validate_integer_valid(self):
        """Test validate_integer with valid integer"""
        self.assertEqual(validate_integer("123", "Test"), 123)

    def test_validate_integer_rejects_fraction(self):
        """Test validate_integer rejects 2.5 and booleans"""
        with self.assertRaises(ValidationError):
            validate_integer(2.5, "Test")
        with self.assertRaises(ValidationError):
            validate_integer(True, "Test")

    def test_validate_integer_range(self):
        """Test validate_integer with range constraints"""
        self.assertEqual(validate_integer(5, "Test", min_value=1, max_value=10), 5)
        with self.assertRaises(ValidationError):
            validate_integer(0, "Test", min_value=1)

    def test_validate_odd_kernel(self):
        """Test median kernels must be odd"""
        self.assertEqual(validate_odd_kernel(5), 5)
        with self.assertRaises(ParameterError):
            validate_odd_kernel(4)
        with self.assertRaises(ParameterError):
            validate_odd_kernel(0)

    def test_validate_choice(self):
        """Test validate_choice returns the canonical spelling"""
        self.assertEqual(validate_choice("KITE", "Template", ["Kite", "Rectangle"]), "Kite")
        with self.assertRaises(ValidationError):
            validate_choice("Circle", "Template", ["Kite", "Rectangle"])

    def test_validate_seed(self):
        """Test seeds are unsigned 64-bit or None"""
        self.assertIsNone(validate_seed(None))
        self.assertEqual(validate_seed(2 ** 64 - 1), 2 ** 64 - 1)
        with self.assertRaises(ValidationError):
            validate_seed(-1)
        with self.assertRaises(ValidationError):
            validate_seed(2 ** 64)


class TestErrorHierarchy(unittest.TestCase):
    """Every domain error is a ValidationError"""

    def test_subclasses(self):
        """Test domain errors share the ValidationError base"""
        for cls in (RangeError, ParameterError, ConfigError, InfeasibleGeometryError, TraceParseError):
            self.assertTrue(issubclass(cls, ValidationError))

    def test_infeasible_geometry_constraint(self):
        """Test InfeasibleGeometryError carries the violated constraint"""
        err = InfeasibleGeometryError("no diagonal", constraint="polygon")
        self.assertEqual(err.constraint, "polygon")

    def test_trace_parse_error_line_number(self):
        """Test TraceParseError prefixes the line number"""
        err = TraceParseError("bad value", 7)
        self.assertEqual(err.line_number, 7)
        self.assertTrue(str(err).startswith("line 7: "))


if __name__ == '__main__':
    unittest.main()
