# Copyright 2026 refractlib developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
import csv
import io
import json
import math
from typing import Any, Dict, Iterable, List, Sequence

from .config_parser import ConfigSyntaxError

# Ten significant digits.
NUMBER_FORMAT = ".9e"


def format_number(value: float) -> str:
    """Format a number in scientific notation with ten significant digits."""
    if math.isnan(value):
        return "nan"

    if math.isinf(value):
        return "inf" if value > 0 else "-inf"

    return format(float(value), NUMBER_FORMAT)


def _cell(value: Any) -> str:
    if value is None:
        return ""

    if isinstance(value, bool):
        return "true" if value else "false"

    if isinstance(value, (int, float)):
        return format_number(value)

    return str(value)


def format_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Format rows as CSV with a mandatory header row.

    Args:
        header: Column names
        rows: Row values; numbers are written in scientific notation, None as an empty field

    Returns:
        CSV text with '\\n' line endings
    """
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])

    return output.getvalue()


def _jsonable(value: Any) -> Any:
    """Replace non-finite floats, which JSON cannot represent, by strings."""
    if isinstance(value, float) and not math.isfinite(value):
        return format_number(value)

    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}

    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]

    return value


def format_json(document: Dict[str, Any]) -> str:
    """Format a result document as indented JSON."""
    return json.dumps(_jsonable(document), indent=2) + "\n"


def format_errors(errors: List[ConfigSyntaxError]) -> str:
    """Format a list of configuration syntax errors as a string.

    Args:
        errors: List of syntax errors to format

    Returns:
        Formatted error string with each error on separate lines
    """
    output = io.StringIO()

    for error in errors:
        caret = " " * (error.column - 1)
        error_message = (
            f"{error.message}: line {error.line}, column {error.column}, "
            f"file {error.filename}\n{caret}|\n{caret}v\n{error.input_text}"
        )
        output.write(f"----------------\n{error_message}\n")

    output.write("----------------\n")
    return output.getvalue()
