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
Published Parisian ruin tables: grids, model parameters and printed reference values.

Tables 1 and 2 use the Cramer-Lundberg model with exponential claims (eta = 5, alpha = 1),
tables 3 and 4 the Brownian model (sigma = 6).  Printed parameters that are inconsistent
with the printed values are replaced by the ones the values match, and each such cell says
so in its note.

Doubtful printed values are not listed by hand.  `check_table` recomputes every cell and, given
simulation settings, simulates each cell that misses its printed value by more than
FORMULA_TOLERANCE (and every cell of a table whose printed values are unreliable).  A printed
value the simulation rejects is reported as a suspected typo.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

from .levy_model import BrownianRisk, CramerLundbergExp, RefractedModel
from .monte_carlo import McConfig, McEstimate, simulate_parisian
from .parisian_ruin import ParisianQuery, classical_ruin_u, parisian_ruin_prob
from .refract_errors import ValidationError

logger = logging.getLogger(__name__)

ROWS = (1.0, 5.0, 10.0, 20.0, 30.0)

# Cells further than this from their printed value are cross-checked by simulation.
FORMULA_TOLERANCE = 1e-6

# Standard errors beyond which a value and a simulation disagree.
Z_LIMIT = 3.0


@dataclass(frozen=True)
class TableCell:
    """
    One cell of a published table.

    Attributes:
        x (float): Initial surplus (row).
        column (float): Column parameter (delta or r).
        rm (RefractedModel): Model the cell is evaluated with.
        r (float): Delay the cell is evaluated with; 0 means classical ruin.
        reference (float): Printed value.
        note (str): Why the cell is evaluated with parameters other than the caption's.
    """
    x: float
    column: float
    rm: RefractedModel
    r: float
    reference: float
    note: str = ""


@dataclass(frozen=True)
class ReferenceTable:
    """
    A published table.

    Attributes:
        number (int): Table number.
        title (str): Caption.
        column_name (str): "delta" or "r".
        columns (Tuple[float, ...]): Column parameters.
        references (Tuple[Tuple[float, ...], ...]): Printed values, one row per entry of ROWS.
        model_for (Callable[[float], Tuple[RefractedModel, float]]): Column parameter to (model, delay).
        column_notes (Dict[int, str]): Notes applying to whole columns.
        simulate_all (bool): Whether every cell is simulated, not only those missing their printed value.
    """
    number: int
    title: str
    column_name: str
    columns: Tuple[float, ...]
    references: Tuple[Tuple[float, ...], ...]
    model_for: Callable[[float], Tuple[RefractedModel, float]]
    column_notes: Dict[int, str] = field(default_factory=dict)
    simulate_all: bool = False

    def cells(self) -> List[TableCell]:
        """All cells in row-major order."""
        cells = []
        for i, x in enumerate(ROWS):
            for j, column in enumerate(self.columns):
                rm, r = self.model_for(column)
                cells.append(TableCell(x, column, rm, r, self.references[i][j], self.column_notes.get(j, "")))

        return cells

    def to_dict(self) -> Dict[str, Any]:
        return {
            "number": self.number,
            "title": self.title,
            "column_name": self.column_name,
            "columns": list(self.columns),
            "rows": list(ROWS),
        }


def _table_1(delta: float) -> Tuple[RefractedModel, float]:
    return RefractedModel(CramerLundbergExp(6.0 + delta, 5.0, 1.0), delta), 2.0


def _table_2(r: float) -> Tuple[RefractedModel, float]:
    return RefractedModel(CramerLundbergExp(9.0, 5.0, 1.0), 3.0), r


def _table_3(delta: float) -> Tuple[RefractedModel, float]:
    return RefractedModel(BrownianRisk(6.0 + delta, 6.0), delta), 2.0 if delta == 0 else 1.0


def _table_4(r: float) -> Tuple[RefractedModel, float]:
    return RefractedModel(BrownianRisk(6.0, 6.0), 2.0), r


TABLES: Dict[int, ReferenceTable] = {
    1: ReferenceTable(
        number=1,
        title="Impact of the refraction parameter on Parisian ruin, Cramer-Lundberg model (r = 2, c - delta = 6)",
        column_name="delta",
        columns=(0.0, 1.0, 3.0, 5.0),
        references=(
            (2.872324151e-1, 1.850876547e-1, 5.573334777e-2, 1.226635655e-2),
            (1.474700390e-1, 9.50271705e-2, 2.86144548e-2, 6.2977571e-3),
            (6.40902148e-2, 4.12986379e-2, 1.24357907e-2, 2.7369940e-3),
            (1.210507796e-2, 7.8003051e-3, 2.3488176e-3, 5.169513e-4),
            (2.286353896e-3, 1.4732872e-3, 4.436344e-4, 9.76391e-6),
        ),
        model_for=_table_1,
    ),
    2: ReferenceTable(
        number=2,
        title="Impact of the delay parameter on Parisian ruin, Cramer-Lundberg model (delta = 3, c = 9)",
        column_name="r",
        columns=(0.0, 1.0, 2.0, 3.0),
        references=(
            (7.054014374e-1, 1.727546072e-1, 5.573334777e-2, 2.064556230e-2),
            (3.621651737e-1, 8.86951728e-2, 2.86144548e-2, 1.05997853e-2),
            (1.573963357e-1, 3.85467632e-2, 1.24357907e-2, 4.6066476e-3),
            (2.972832780e-2, 7.2805432e-3, 2.3488176e-3, 8.700832e-4),
            (5.614955832e-3, 1.3751168e-3, 4.436344e-4, 1.643375e-4),
        ),
        model_for=_table_2,
        column_notes={0: "r = 0 is the classical ruin probability of the refracted process"},
    ),
    3: ReferenceTable(
        number=3,
        title="Impact of the refraction parameter on Parisian ruin, Brownian model (c - delta = 6, sigma = 6)",
        column_name="delta",
        columns=(0.0, 1.0, 3.0, 4.0, 5.0),
        references=(
            (1.756316e-2, 4.058863e-2, 2.040134e-2, 1.393016e-2, 9.279776e-3),
            (4.629599e-3, 1.069916e-3, 5.377735e-2, 3.671950e-3, 2.446123e-3),
            (8.744183e-4, 2.020791e-3, 1.015725e-3, 6.935426e-4, 4.620132e-4),
            (3.119399e-5, 7.209243e-5, 3.623682e-4, 2.474236e-5, 1.648221e-5),
            (1.112814e-6, 2.574575e-6, 1.294587e-6, 8.835856e-7, 5.883359e-7),
        ),
        model_for=_table_3,
        column_notes={
            1: "evaluated at r = 1, the delay the printed column matches",
            2: "evaluated at r = 1, the delay the printed column matches",
            3: "evaluated at r = 1, the delay the printed column matches",
            4: "evaluated at r = 1, the delay the printed column matches",
        },
        simulate_all=True,
    ),
    4: ReferenceTable(
        number=4,
        title="Impact of the delay parameter on Parisian ruin, Brownian model (c = 6, delta = 2)",
        column_name="r",
        columns=(0.0, 1.0, 2.0, 4.0, 6.0),
        references=(
            (8.3650684e-1, 8.89538704e-2, 2.908344e-2, 5.066851e-3, 1.146373e-3),
            (3.6513221e-1, 3.65700339e-2, 1.195692e-2, 2.083045e-3, 4.712679e-4),
            (1.2674282e-1, 1.20385972e-2, 3.936133e-3, 6.857238e-4, 1.551377e-4),
            (1.908693e-2, 1.3045990e-3, 4.265510e-4, 7.431054e-5, 1.681198e-5),
            (3.41422e-3, 1.413768e-4, 4.622456e-5, 8.052897e-6, 1.821894e-6),
        ),
        model_for=_table_4,
        column_notes={0: "r = 0 column is unverified: classical ruin of the refracted process reported"},
    ),
}


def reference_table(number: int) -> ReferenceTable:
    """
    Look up a published table.

    Raises:
        ValidationError: If the number is not 1 to 4.
    """
    if number not in TABLES:
        raise ValidationError("table number must be 1, 2, 3 or 4", "table", number)

    return TABLES[number]


def evaluate_cell(cell: TableCell) -> float:
    """Compute a cell: Parisian ruin with the cell's delay, classical ruin when the delay is 0."""
    if cell.r == 0:
        return classical_ruin_u(cell.rm, cell.x)

    return parisian_ruin_prob(ParisianQuery(cell.rm, cell.x, cell.r)).value


def relative_deviation(value: float, reference: float) -> float:
    if reference == 0:
        return math.inf if value != 0 else 0.0

    return abs(value - reference) / abs(reference)


def score_z(value: float, estimate: McEstimate) -> float:
    """
    Standard errors between a simulated probability and a hypothesized value.

    The standard error is taken under the hypothesis, sqrt(p (1 - p) / n), so that probabilities
    far below 1 / n stay testable when no simulated path was ruined.
    """
    variance = value * (1.0 - value) / estimate.paths
    if variance <= 0:
        return 0.0 if estimate.value == value else math.inf

    return (estimate.value - value) / math.sqrt(variance)


@dataclass(frozen=True)
class CellCheck:
    """
    A recomputed cell and, when one was run, its simulation.

    Attributes:
        cell (TableCell): The published cell.
        value (float): Recomputed value.
        mc (Optional[McEstimate]): Simulation of the cell; None when it was not simulated.
        skip_reason (str): Why a deviating cell was not simulated.
    """
    cell: TableCell
    value: float
    mc: Optional[McEstimate] = None
    skip_reason: str = ""

    @property
    def deviation(self) -> float:
        return relative_deviation(self.value, self.cell.reference)

    @property
    def matches(self) -> bool:
        """True when the recomputed value is within FORMULA_TOLERANCE of the printed one."""
        return self.deviation <= FORMULA_TOLERANCE

    @property
    def z_formula(self) -> Optional[float]:
        return None if self.mc is None else score_z(self.value, self.mc)

    @property
    def z_printed(self) -> Optional[float]:
        return None if self.mc is None else score_z(self.cell.reference, self.mc)

    @property
    def mc_agrees(self) -> Optional[bool]:
        """Whether the recomputed value is within Z_LIMIT standard errors of the simulation; None without one."""
        z = self.z_formula
        return None if z is None else abs(z) <= Z_LIMIT

    @property
    def printed_rejected(self) -> bool:
        z = self.z_printed
        return z is not None and abs(z) > Z_LIMIT

    @property
    def note(self) -> str:
        notes = [self.cell.note] if self.cell.note else []
        z_formula = self.z_formula
        z_printed = self.z_printed
        if z_formula is not None and abs(z_formula) > Z_LIMIT:
            notes.append(f"recomputed value is {abs(z_formula):.3g} SE from Monte Carlo")

        if not self.matches:
            if z_printed is None:
                notes.append(self.skip_reason or "deviation not checked by Monte Carlo")

            elif self.printed_rejected:
                notes.append(f"suspected typo: printed value is {abs(z_printed):.3g} SE from Monte Carlo")

            else:
                notes.append("deviation below Monte Carlo resolution")

        return "; ".join(notes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x": self.cell.x,
            "column": self.cell.column,
            "r_used": self.cell.r,
            "value": self.value,
            "reference": self.cell.reference,
            "relative_deviation": self.deviation,
            "mc": self.mc.to_dict() if self.mc is not None else None,
            "z_formula": self.z_formula,
            "z_printed": self.z_printed,
            "note": self.note,
        }


def check_table(number: int, cfg: Optional[McConfig] = None) -> List[CellCheck]:
    """
    Recompute every cell of a published table and cross-check the doubtful ones by simulation.

    Without simulation settings only the recomputation is done.  With them, every cell missing its
    printed value by more than FORMULA_TOLERANCE is simulated, as is every cell of a table whose
    printed values are unreliable.  Classical ruin cells (delay 0) have no Parisian path functional
    and are never simulated.

    Args:
        number: Table number, 1 to 4.
        cfg: Simulation settings, or None.

    Returns:
        One check per cell in row-major order.

    Raises:
        ValidationError: If the number is not 1 to 4 or the settings do not fit a cell's delay.
    """
    table = reference_table(number)
    checks = []
    for cell in table.cells():
        value = evaluate_cell(cell)
        deviating = relative_deviation(value, cell.reference) > FORMULA_TOLERANCE
        if cfg is None or not (table.simulate_all or deviating):
            checks.append(CellCheck(cell, value))
            continue

        if cell.r == 0:
            checks.append(CellCheck(cell, value, skip_reason="classical ruin cell, not simulated"))
            continue

        estimate = simulate_parisian(cell.rm, cell.x, cell.r, cfg)
        logger.debug(
            "table %d cell x=%g %s=%g: formula %.10g, simulation %.6g (%.2g)", number, cell.x, table.column_name,
            cell.column, value, estimate.value, estimate.stderr
        )
        checks.append(CellCheck(cell, value, estimate))

    return checks


def discrepancies(checks: Iterable[CellCheck]) -> List[CellCheck]:
    """Cells that miss their printed value, or whose recomputed value the simulation rejects."""
    return [check for check in checks if not check.matches or check.mc_agrees is False]
