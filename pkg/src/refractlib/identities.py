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
Audit suite of the identities the ruin formulas rest on.

Every check reports a residual next to its tolerance; `run_identities` collects them for the
`identities` command, which fails when any residual exceeds its tolerance.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

from .levy_model import BrownianRisk, CramerLundbergExp, RefractedModel, net_profit_margin
from .parisian_ruin import (
    ParisianQuery, classical_ruin_u, classical_ruin_y, exit_up_before_parisian, parisian_laplace_to_barrier,
    parisian_ruin_prob
)
from .positive_law import build_law, exp_kernel_identity_check
from .refract_errors import UnsupportedOperationError
from .scale_functions import (
    kernel_W, kernel_W_delta, residual_a1, residual_a2, scale_context, scale_function
)

logger = logging.getLogger(__name__)

EXP_KERNEL_TOLERANCE = 1e-7
CONVOLUTION_TOLERANCE = 1e-8
CLASSICAL_TOLERANCE = 1e-10
DENOMINATOR_TOLERANCE = 1e-9
COMPLEMENT_TOLERANCE = 1e-8
KERNEL_FORM_TOLERANCE = 1e-9

DISCOUNT_GRID = (0.0, 0.05, 0.1)
DELAY_GRID = (0.5, 1.0, 2.0)
CONVOLUTION_RATES = (0.0, 0.05, 0.2)
CONVOLUTION_POINTS = (0.5, 1.0, 3.0, 10.0)
CLASSICAL_POINTS = (0.5, 1.0, 5.0, 10.0, 20.0, 30.0)


@dataclass(frozen=True)
class IdentityCheck:
    """
    One audited identity at one parameter point.

    Attributes:
        name (str): Identity name.
        parameters (Dict[str, float]): Where it was evaluated.
        residual (float): Absolute or relative residual, as the identity defines it.
        tolerance (float): Largest acceptable residual.
    """
    name: str
    parameters: Dict[str, float]
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and abs(self.residual) <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "parameters": dict(self.parameters),
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def default_models() -> List[RefractedModel]:
    """Models audited when no configuration is given."""
    return [
        RefractedModel(CramerLundbergExp(9.0, 5.0, 1.0), 3.0),
        RefractedModel(BrownianRisk(6.0, 6.0), 2.0),
    ]


def _model_parameters(rm: RefractedModel, **extra: float) -> Dict[str, float]:
    parameters = {key: value for key, value in rm.to_dict().items() if isinstance(value, (int, float))}
    parameters.update(extra)
    return parameters


def exp_kernel_checks(rm: RefractedModel, qs: Iterable[float] = DISCOUNT_GRID,
                      rs: Iterable[float] = DELAY_GRID) -> List[IdentityCheck]:
    """int W^(q)(z) (z/r) P(X_r in dz) = exp(q r)."""
    checks = []
    for r in rs:
        law = build_law(rm.x_model, r)
        for q in qs:
            checks.append(IdentityCheck(
                "exp_kernel", _model_parameters(rm, q=q, r=r), exp_kernel_identity_check(law, q), EXP_KERNEL_TOLERANCE
            ))

    return checks


def convolution_checks(rm: RefractedModel, rates: Sequence[float] = CONVOLUTION_RATES,
                       points: Iterable[float] = CONVOLUTION_POINTS) -> List[IdentityCheck]:
    """
    Convolution identities between scale functions of X and Y, scaled by max(1, |W^(q)(x)|).
    """
    checks = []
    ctx = scale_context(rm, 0.0)
    for p in rates:
        for q in rates:
            w_q = scale_function(rm.x_model, q)
            for x in points:
                scale = max(1.0, abs(float(w_q(x))))
                parameters = _model_parameters(rm, p=p, q=q, x=x)
                checks.append(IdentityCheck(
                    "convolution_refracted", parameters, residual_a1(ctx, p, q, x) / scale, CONVOLUTION_TOLERANCE
                ))
                checks.append(IdentityCheck(
                    "convolution", parameters, residual_a2(ctx, p, q, x) / scale, CONVOLUTION_TOLERANCE
                ))

    return checks


def kernel_form_checks(rm: RefractedModel, q: float = 0.1, a: float = 1.0,
                       points: Iterable[float] = CONVOLUTION_POINTS) -> List[IdentityCheck]:
    """
    Both written forms of the auxiliary kernels agree; the first is integrated numerically.
    """
    checks = []
    ctx = scale_context(rm, q)
    for x in points:
        parameters = _model_parameters(rm, q=q, a=a, x=x)
        for name, kernel in (("kernel_forms", kernel_W), ("kernel_forms_refracted", kernel_W_delta)):
            first = kernel(ctx, q, -q, a, x, 1)
            second = kernel(ctx, q, -q, a, x, 2)
            residual = abs(first - second) / max(1.0, abs(second))
            checks.append(IdentityCheck(name, parameters, residual, KERNEL_FORM_TOLERANCE))

    return checks


def classical_checks(rm: RefractedModel, points: Iterable[float] = CLASSICAL_POINTS) -> List[IdentityCheck]:
    """Above 0 the refracted process and Y agree until ruin, so their ruin probabilities coincide."""
    return [
        IdentityCheck(
            "classical_ruin", _model_parameters(rm, x=x), abs(classical_ruin_y(rm, x) - classical_ruin_u(rm, x)),
            CLASSICAL_TOLERANCE
        )
        for x in points
    ]


def denominator_checks(rm: RefractedModel, rs: Iterable[float] = DELAY_GRID) -> List[IdentityCheck]:
    """The two denominators of the Parisian ruin probability agree."""
    checks = []
    for r in rs:
        result = parisian_ruin_prob(ParisianQuery(rm, 1.0, r))
        checks.append(IdentityCheck(
            "ruin_denominator", _model_parameters(rm, r=r), result.diagnostics["denominator_residual"],
            DENOMINATOR_TOLERANCE
        ))

    return checks


def complement_checks(rm: RefractedModel, x: float = 1.0, r: float = 1.0, a: float = 5.0) -> List[IdentityCheck]:
    """Without discounting, exactly one of Parisian ruin and reaching a happens first."""
    query = ParisianQuery(rm, x, r, 0.0, a)
    total = parisian_laplace_to_barrier(query).value + exit_up_before_parisian(query).value
    return [IdentityCheck("complementarity", _model_parameters(rm, x=x, r=r, a=a), abs(total - 1.0), COMPLEMENT_TOLERANCE)]


SUITE: Dict[str, Callable[[RefractedModel], List[IdentityCheck]]] = {
    "exp_kernel": exp_kernel_checks,
    "convolution": convolution_checks,
    "kernel_forms": kernel_form_checks,
    "classical_ruin": classical_checks,
    "ruin_denominator": denominator_checks,
    "complementarity": complement_checks,
}


def run_identities(models: Optional[Iterable[RefractedModel]] = None) -> List[IdentityCheck]:
    """
    Run the whole audit suite.

    Checks that need a positive net profit are skipped for models without one, and checks
    a model does not support (such as the stable model with discounting) are skipped with
    an info message.

    Args:
        models: Refracted models to audit; `default_models()` when None.

    Returns:
        Every check, in suite order, model by model.
    """
    results: List[IdentityCheck] = []
    for rm in (default_models() if models is None else models):
        needs_profit = ("ruin_denominator", "complementarity")
        for name, suite in SUITE.items():
            if name in needs_profit and net_profit_margin(rm) <= 0:
                logger.info("skipping %s for %s: no net profit", name, rm.to_dict())
                continue

            try:
                results.extend(suite(rm))

            except UnsupportedOperationError as e:
                logger.info("skipping %s for %s: %s", name, rm.to_dict(), e)

    failed = sum(1 for check in results if not check.passed)
    logger.debug("identity suite: %d checks, %d failed", len(results), failed)
    return results
