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
Resolution of a configuration tree and command-line overrides into a validated RunSpec.
"""

import itertools
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Dict, Final, List, Optional, Tuple

from .config_node import ConfigNode, ConfigNodeType
from .levy_model import (
    BrownianRisk, CramerLundbergExp, JumpDiffusionPhaseType, LevyModel, RefractedModel, StableThreeHalves
)
from .monte_carlo import McConfig
from .refract_errors import ValidationError


class Command(IntEnum):
    """
    CLI subcommands.
    """
    EVAL: int = 0
    TABLE: int = 1
    VERIFY: int = 2
    SWEEP: int = 3
    IDENTITIES: int = 4


class Quantity(IntEnum):
    """
    Quantities that `eval`, `sweep` and `verify` can compute.
    """
    PARISIAN: int = 0
    LAPLACE_BARRIER: int = 1
    LAPLACE: int = 2
    EXIT_UP: int = 3
    CLASSICAL_X: int = 4
    CLASSICAL_Y: int = 5
    CLASSICAL_U: int = 6
    FIRST_PASSAGE_UP: int = 7
    OVERSHOOT: int = 8
    TAU_UP: int = 9


QUANTITY_NAMES: Final[Dict[str, Quantity]] = {quantity.name.lower(): quantity for quantity in Quantity}

# Quantities whose value does not depend on the Parisian delay.
DELAY_FREE: Final = frozenset({
    Quantity.CLASSICAL_X, Quantity.CLASSICAL_Y, Quantity.CLASSICAL_U, Quantity.FIRST_PASSAGE_UP, Quantity.OVERSHOOT
})

MODEL_KEYS: Final[Dict[str, Tuple[str, ...]]] = {
    "cramer_lundberg": ("c", "eta", "alpha"),
    "brownian": ("c", "sigma"),
    "phase_type": ("c", "sigma", "eta", "alpha_vec", "t_mat"),
    "stable": ("c",),
}

SECTION_KEYS: Final[Dict[ConfigNodeType, Tuple[str, ...]]] = {
    ConfigNodeType.REFRACTION: ("delta",),
    ConfigNodeType.QUERY: ("quantity", "x", "r", "delta", "q", "a", "b", "theta", "table"),
    ConfigNodeType.MC: ("paths", "seed", "horizon", "step", "workers", "block_size"),
    ConfigNodeType.OUTPUT: ("format", "path"),
}

OUTPUT_FORMATS: Final = ("csv", "json")


@dataclass(frozen=True)
class GridPoint:
    """One (delta, x, r) combination of a run."""
    index: int
    rm: RefractedModel
    x: float
    r: Optional[float]


@dataclass(frozen=True)
class RunSpec:
    """
    A fully resolved run.

    Attributes:
        command (Command): What to do.
        x_model (Optional[LevyModel]): The model below 0; None when the command needs none.
        deltas (Tuple[float, ...]): Refraction rates.
        quantity (Quantity): What `eval`, `sweep` and `verify` compute.
        xs (Tuple[float, ...]): Initial surpluses.
        rs (Tuple[float, ...]): Parisian delays; empty for delay-free quantities.
        q (float): Discount rate.
        a (float): Upper barrier, infinite when absent.
        b (Optional[float]): First-passage level.
        theta (Optional[float]): Overshoot exponent.
        table (Optional[int]): Published table number for `table`.
        mc (McConfig): Monte Carlo settings.
        mc_requested (bool): True when the document or the command line gave simulation settings.
        output_format (Optional[str]): "csv" or "json"; None leaves the choice to the command.
        output_path (Optional[str]): Destination file; standard output when None.
    """
    command: Command
    x_model: Optional[LevyModel] = None
    deltas: Tuple[float, ...] = (0.0,)
    quantity: Quantity = Quantity.PARISIAN
    xs: Tuple[float, ...] = ()
    rs: Tuple[float, ...] = ()
    q: float = 0.0
    a: float = math.inf
    b: Optional[float] = None
    theta: Optional[float] = None
    table: Optional[int] = None
    mc: McConfig = field(default_factory=McConfig)
    mc_requested: bool = False
    output_format: Optional[str] = None
    output_path: Optional[str] = None

    def grid(self) -> List[GridPoint]:
        """
        Cartesian product of the refraction rates, surpluses and delays, in grid-index order.

        A delay-dependent quantity with no delays has an empty grid.

        Raises:
            ValidationError: If a refracted model violates the drift constraint.
        """
        if self.x_model is None or (self.quantity not in DELAY_FREE and not self.rs):
            return []

        rs: Tuple[Optional[float], ...] = self.rs if self.rs else (None,)
        points: List[GridPoint] = []
        for delta, x, r in itertools.product(self.deltas, self.xs, rs):
            points.append(GridPoint(len(points), RefractedModel(self.x_model, delta), x, r))

        return points

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {
            "command": self.command.name.lower(),
            "quantity": self.quantity.name.lower(),
            "x": list(self.xs),
            "r": list(self.rs),
            "delta": list(self.deltas),
            "q": self.q,
        }
        if self.x_model is not None:
            result["model"] = self.x_model.to_dict()

        if math.isfinite(self.a):
            result["a"] = self.a

        for name in ("b", "theta", "table"):
            value = getattr(self, name)
            if value is not None:
                result[name] = value

        return result


def parse_number(name: str, text: str) -> float:
    """Parse a decimal number; 'inf' is accepted, NaN is not."""
    try:
        value = float(text)

    except ValueError as e:
        raise ValidationError(f"'{name}' is not a number: {text!r}", name, text) from e

    if math.isnan(value):
        raise ValidationError(f"'{name}' is not a number: {text!r}", name, text)

    return value


def parse_integer(name: str, text: str) -> int:
    try:
        return int(text)

    except ValueError as e:
        raise ValidationError(f"'{name}' is not an integer: {text!r}", name, text) from e


def parse_list(name: str, text: str) -> Tuple[float, ...]:
    """Parse a comma-separated list of numbers; blank text, or only commas, is an empty list."""
    items = [item.strip() for item in text.split(",")]
    if not any(items):
        return ()

    return tuple(parse_number(name, item) for item in items)


def parse_matrix(name: str, text: str) -> Tuple[Tuple[float, ...], ...]:
    """Parse a matrix written as ';'-separated rows of comma-separated numbers."""
    rows = tuple(parse_list(name, row) for row in text.split(";"))
    widths = {len(row) for row in rows}
    if len(widths) != 1 or 0 in widths:
        raise ValidationError(f"'{name}' rows must be nonempty and of equal length", name, text)

    return rows


def _check_keys(entries: Dict[str, str], allowed: Tuple[str, ...], section: str) -> None:
    for key in entries:
        if key not in allowed:
            raise ValidationError(f"unknown key '{key}' in '{section}' section", key, entries[key])


def _required(entries: Dict[str, str], key: str, model_name: str) -> str:
    if key not in entries:
        raise ValidationError(f"model '{model_name}' needs '{key}'", key, None)

    return entries[key]


def build_model(model_name: str, entries: Dict[str, str]) -> LevyModel:
    """
    Construct a Levy model from the entries of a Model: section.

    Args:
        model_name: One of cramer_lundberg, brownian, phase_type, stable.
        entries: Raw key to value mapping.

    Raises:
        ValidationError: If the model is unknown, a key is missing or unknown, or a value is invalid.
    """
    if model_name not in MODEL_KEYS:
        raise ValidationError(f"unknown model '{model_name}'", "model", model_name)

    _check_keys(entries, MODEL_KEYS[model_name], "Model")
    c = parse_number("c", _required(entries, "c", model_name))
    if model_name == "cramer_lundberg":
        return CramerLundbergExp(
            c, parse_number("eta", _required(entries, "eta", model_name)),
            parse_number("alpha", _required(entries, "alpha", model_name))
        )

    if model_name == "brownian":
        return BrownianRisk(c, parse_number("sigma", _required(entries, "sigma", model_name)))

    if model_name == "stable":
        return StableThreeHalves(c)

    return JumpDiffusionPhaseType(
        c,
        parse_number("sigma", entries.get("sigma", "0")),
        parse_number("eta", _required(entries, "eta", model_name)),
        parse_list("alpha_vec", _required(entries, "alpha_vec", model_name)),
        parse_matrix("t_mat", _required(entries, "t_mat", model_name)),
    )


def _section_entries(root: Optional[ConfigNode], node_type: ConfigNodeType) -> Dict[str, str]:
    if root is None:
        return {}

    section = root.section(node_type)
    if section is None:
        return {}

    entries = section.entries()
    _check_keys(entries, SECTION_KEYS[node_type], node_type.name.capitalize())
    return entries


def _mc_config(entries: Dict[str, str], overrides: Dict[str, Any]) -> McConfig:
    values: Dict[str, Any] = {}
    for key in ("paths", "seed", "workers", "block_size"):
        if key in entries:
            values[key] = parse_integer(key, entries[key])

    for key in ("horizon", "step"):
        if key in entries:
            values[key] = parse_number(key, entries[key])

    for key in ("paths", "seed", "workers"):
        if overrides.get(key) is not None:
            values[key] = overrides[key]

    return McConfig(**values)


def build_run_spec(command: Command, root: Optional[ConfigNode], overrides: Optional[Dict[str, Any]] = None) -> RunSpec:
    """
    Resolve a configuration tree and command-line overrides into a RunSpec.

    Command-line values ('paths', 'seed', 'workers', 'format', 'out', 'table') win over the document.

    Args:
        command: The subcommand being run.
        root: Parsed configuration, or None when no document was given.
        overrides: Values from command-line flags; None entries are ignored.

    Returns:
        The validated run.

    Raises:
        ValidationError: For unknown sections or keys and for invalid values.
    """
    overrides = overrides or {}
    model: Optional[LevyModel] = None
    if root is not None:
        model_section = root.section(ConfigNodeType.MODEL)
        if model_section is not None:
            model = build_model(model_section.value.strip().lower(), model_section.entries())

    refraction = _section_entries(root, ConfigNodeType.REFRACTION)
    query = _section_entries(root, ConfigNodeType.QUERY)
    output = _section_entries(root, ConfigNodeType.OUTPUT)
    mc = _mc_config(_section_entries(root, ConfigNodeType.MC), overrides)
    has_mc_section = root is not None and root.section(ConfigNodeType.MC) is not None
    mc_requested = has_mc_section or overrides.get("paths") is not None

    quantity_name = query.get("quantity", "parisian").strip().lower()
    if quantity_name not in QUANTITY_NAMES:
        raise ValidationError(f"unknown quantity '{quantity_name}'", "quantity", quantity_name)

    quantity = QUANTITY_NAMES[quantity_name]
    deltas = parse_list("delta", query.get("delta", refraction.get("delta", "0")))
    if any(delta < 0 for delta in deltas):
        raise ValidationError("'delta' must be nonnegative", "delta", deltas)

    xs = parse_list("x", query.get("x", ""))
    rs = parse_list("r", query.get("r", "")) if quantity not in DELAY_FREE else ()
    q = parse_number("q", query.get("q", "0"))
    a = parse_number("a", query.get("a", "inf"))
    b = parse_number("b", query["b"]) if "b" in query else None
    theta = parse_number("theta", query["theta"]) if "theta" in query else None

    table: Optional[int] = parse_integer("table", query["table"]) if "table" in query else None
    if overrides.get("table") is not None:
        table = overrides["table"]

    output_format = overrides.get("format") or output.get("format")
    if output_format is not None:
        output_format = output_format.lower()

    if output_format is not None and output_format not in OUTPUT_FORMATS:
        raise ValidationError(f"unknown output format '{output_format}'", "format", output_format)

    output_path = overrides.get("out") or output.get("path")

    if command in (Command.EVAL, Command.SWEEP, Command.VERIFY):
        if model is None:
            raise ValidationError(f"'{command.name.lower()}' needs a Model: section", "model", None)

        # A sweep may name an axis with an empty list; its grid is then empty.
        empty_sweep_axis = {key for key in ("x", "r") if command == Command.SWEEP and key in query}
        if quantity not in DELAY_FREE and not rs and "r" not in empty_sweep_axis:
            raise ValidationError(f"quantity '{quantity_name}' needs a delay 'r'", "r", None)

        if not xs and "x" not in empty_sweep_axis:
            raise ValidationError("at least one initial surplus 'x' is needed", "x", None)

    if command == Command.EVAL and (len(xs) != 1 or len(deltas) != 1 or len(rs) > 1):
        raise ValidationError("'eval' takes a single x, r and delta; use 'sweep' for grids", "x", xs)

    if command == Command.TABLE and table not in (1, 2, 3, 4):
        raise ValidationError("table number must be 1, 2, 3 or 4", "table", table)

    if quantity == Quantity.FIRST_PASSAGE_UP and b is None and command != Command.TABLE:
        raise ValidationError("quantity 'first_passage_up' needs a level 'b'", "b", None)

    if quantity == Quantity.OVERSHOOT and theta is None and command != Command.TABLE:
        raise ValidationError("quantity 'overshoot' needs 'theta'", "theta", None)

    spec = RunSpec(
        command=command,
        x_model=model,
        deltas=deltas,
        quantity=quantity,
        xs=xs,
        rs=rs,
        q=q,
        a=a,
        b=b,
        theta=theta,
        table=table,
        mc=mc,
        mc_requested=mc_requested,
        output_format=output_format,
        output_path=output_path,
    )

    if model is not None:
        for delta in deltas:
            RefractedModel(model, delta)

    return spec
