"""Unit tests for the output formatter functions."""

import json
import math

from refractlib import ConfigSyntaxError, format_csv, format_errors, format_json
from refractlib.formatters import format_number


def test_format_number():
    """Test ten significant digits in scientific notation."""
    assert format_number(0.7054014374) == "7.054014374e-01"
    assert format_number(1.0) == "1.000000000e+00"
    assert format_number(0.0) == "0.000000000e+00"


def test_format_number_non_finite():
    """Test the spelling of non-finite values."""
    assert format_number(math.nan) == "nan"
    assert format_number(math.inf) == "inf"
    assert format_number(-math.inf) == "-inf"


def test_format_csv_header_only():
    """Test that the header row is always written."""
    assert format_csv(["x", "value"], []) == "x,value\n"


def test_format_csv_cells():
    """Test the rendering of numbers, booleans, None and text."""
    text = format_csv(
        ["x", "r", "value", "passed", "note"],
        [[1.0, None, 0.25, True, "typo, likely 1e-5"]],
    )
    assert text == (
        "x,r,value,passed,note\n"
        "1.000000000e+00,,2.500000000e-01,true,\"typo, likely 1e-5\"\n"
    )


def test_format_csv_integers_as_numbers():
    """Test that integers use the number format too."""
    assert format_csv(["paths"], [[100]]) == "paths\n1.000000000e+02\n"


def test_format_json_round_trips():
    """Test that finite values are written as JSON numbers."""
    document = {"value": 0.5, "method": "closed_form", "parameters": {"x": [1.0, 5.0]}}
    assert json.loads(format_json(document)) == document
    assert format_json(document).endswith("}\n")


def test_format_json_non_finite_values():
    """Test that non-finite floats become strings, including nested ones."""
    text = format_json({"a": math.inf, "points": [{"z": math.nan}], "pair": (1.0, -math.inf)})
    assert json.loads(text) == {"a": "inf", "points": [{"z": "nan"}], "pair": [1.0, "-inf"]}


def test_format_errors_empty_list():
    """Test formatting an empty error list."""
    assert format_errors([]) == "----------------\n"


def test_format_errors_single_error():
    """Test formatting a single error."""
    error = ConfigSyntaxError(
        message="Expected 'key: value' entry",
        filename="run.cfg",
        line=2,
        column=5,
        input_text="    x 1"
    )

    expected = (
        "----------------\n"
        "Expected 'key: value' entry: line 2, column 5, file run.cfg\n"
        "    |\n"
        "    v\n"
        "    x 1\n"
        "----------------\n"
    )
    assert format_errors([error]) == expected


def test_format_errors_multiple_errors():
    """Test formatting multiple errors."""
    errors = [
        ConfigSyntaxError(message="First error", filename="a.cfg", line=1, column=3, input_text="abc"),
        ConfigSyntaxError(message="Second error", filename="b.cfg", line=2, column=1, input_text="xyz"),
    ]

    expected = (
        "----------------\n"
        "First error: line 1, column 3, file a.cfg\n"
        "  |\n"
        "  v\n"
        "abc\n"
        "----------------\n"
        "Second error: line 2, column 1, file b.cfg\n"
        "|\n"
        "v\n"
        "xyz\n"
        "----------------\n"
    )
    assert format_errors(errors) == expected
