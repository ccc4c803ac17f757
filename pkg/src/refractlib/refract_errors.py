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

"""
Exceptions raised by refractlib.

Every exception carries structured fields so callers (and the CLI) can report
failures without parsing message strings.
"""

from typing import Any, Dict, Optional


class RefractError(Exception):
    """Base class for all refractlib errors."""
    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message: str = message

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable form of the error."""
        return {"error": type(self).__name__, "message": self.message}


class ValidationError(RefractError):
    """Exception raised when a model, query or configuration value is invalid."""
    def __init__(self, message: str, field: str = "", value: Any = None) -> None:
        super().__init__(message)
        self.field: str = field
        self.value: Any = value

    def to_dict(self) -> Dict[str, Any]:
        result = super().to_dict()
        result["field"] = self.field
        result["value"] = repr(self.value) if self.value is not None else None
        return result


class UnsupportedOperationError(RefractError):
    """Exception raised when an operation is not available for a model."""
    def __init__(self, message: str, model: str = "", operation: str = "") -> None:
        super().__init__(message)
        self.model: str = model
        self.operation: str = operation

    def to_dict(self) -> Dict[str, Any]:
        result = super().to_dict()
        result["model"] = self.model
        result["operation"] = self.operation
        return result


class NumericError(RefractError):
    """Exception raised when a numerical procedure fails to deliver a trustworthy value."""
    def __init__(self, message: str, diagnostics: Optional[Dict[str, float]] = None) -> None:
        super().__init__(message)
        self.diagnostics: Dict[str, float] = dict(diagnostics) if diagnostics else {}

    def to_dict(self) -> Dict[str, Any]:
        result = super().to_dict()
        result["diagnostics"] = {key: float(value) for key, value in self.diagnostics.items()}
        return result
