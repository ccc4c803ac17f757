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
Classical and Parisian ruin quantities for refracted Levy processes.

All integrals against z P(X_r in dz) go through PositiveLaw.weighted_integral; the
integrands are built from the scale-function kernels.  Short-circuits (no net profit,
x at the barrier) return exact values before any quadrature is attempted.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Callable, Dict, List

import numpy as np

from .levy_model import (
    BrownianRisk, CramerLundbergExp, LevyModel, ModelKind, RefractedModel, laplace_exponent, mean_at_one,
    net_profit_margin
)
from .positive_law import PositiveLaw, build_law, first_moment
from .quadrature import integrate
from .refract_errors import NumericError, UnsupportedOperationError, ValidationError
from .scale_functions import (
    ScaleContext, kernel_H_delta, kernel_W_delta, refracted_w, scale_context, scale_function, scale_w_y, scale_z_y
)

logger = logging.getLogger(__name__)

# The two denominators of the ruin probability must agree to this relative tolerance.
DENOMINATOR_AGREEMENT = 1e-9

# Barrier used to cross-check the barrier-free discounted constant.
BARRIER_LIMIT = 200.0
BARRIER_LIMIT_TOLERANCE = 1e-6

# Relative quadrature tolerance for the numerators of small probabilities.
SMALL_VALUE_EPSABS = 1e-15


class RuinMethod(IntEnum):
    """
    How a result was obtained.
    """
    CLOSED_FORM: int = 0
    QUADRATURE: int = 1
    HYBRID: int = 2


@dataclass(frozen=True)
class ParisianQuery:
    """
    A Parisian ruin question.

    Attributes:
        rm (RefractedModel): The refracted model.
        x (float): Initial surplus.
        r (float): Parisian delay.
        q (float): Discount rate.
        a (float): Upper barrier; infinite when there is none.
    """
    rm: RefractedModel
    x: float
    r: float
    q: float = 0.0
    a: float = math.inf

    def __post_init__(self) -> None:
        if not math.isfinite(self.x):
            raise ValidationError("initial surplus 'x' must be finite", "x", self.x)

        if not math.isfinite(self.r) or self.r <= 0:
            raise ValidationError("delay 'r' must be strictly positive", "r", self.r)

        if not math.isfinite(self.q) or self.q < 0:
            raise ValidationError("discount rate 'q' must be nonnegative", "q", self.q)

        if math.isnan(self.a) or self.a < self.x:
            raise ValidationError("barrier 'a' must not be below the initial surplus", "a", self.a)

    @property
    def has_barrier(self) -> bool:
        return math.isfinite(self.a)

    def to_dict(self) -> Dict[str, Any]:
        result = self.rm.to_dict()
        result.update({"x": self.x, "r": self.r, "q": self.q})
        if self.has_barrier:
            result["a"] = self.a

        return result


@dataclass(frozen=True)
class RuinResult:
    """
    A computed value together with how it was obtained.

    Attributes:
        value (float): The result.
        method (RuinMethod): Closed form, quadrature or a mix of both.
        diagnostics (Dict[str, float]): Residuals of internal cross-checks and intermediate values.
    """
    value: float
    method: RuinMethod
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "method": self.method.name.lower(),
            "diagnostics": {key: float(value) for key, value in self.diagnostics.items()},
        }


def _clip(value: float, upper: float = 1.0) -> float:
    """Clamp rounding noise into [0, upper]."""
    return min(max(value, 0.0), upper)


def _shift_points(x: float) -> List[float]:
    """Kernels in x + z jump or kink where x + z crosses 0."""
    return [-x] if x < 0 else []


def _require_barrier(query: ParisianQuery) -> None:
    if not query.has_barrier:
        raise ValidationError("this quantity needs a finite barrier 'a'", "a", query.a)


def _require_law_model(model: LevyModel, operation: str) -> None:
    if model.kind == ModelKind.STABLE:
        raise UnsupportedOperationError(
            "Parisian quantities are not available for the stable model", type(model).__name__, operation
        )


def classical_ruin_x(model: LevyModel, x: float) -> float:
    """P_x(tau_0^- < inf) = 1 - (E[X_1])_+ W(x)."""
    mean = mean_at_one(model)
    if mean <= 0:
        return 1.0

    return _clip(1.0 - mean * float(scale_function(model, 0.0)(x)))


def classical_ruin_y(rm: RefractedModel, x: float) -> float:
    """Classical ruin probability of Y = X - delta t."""
    margin = net_profit_margin(rm)
    if margin <= 0:
        return 1.0

    return _clip(1.0 - margin * float(scale_w_y(scale_context(rm, 0.0), x)))


def classical_ruin_u(rm: RefractedModel, x: float) -> float:
    """
    Classical ruin probability of the refracted process, 1 - (E[X_1] - delta)_+ w(x; 0) / (1 - delta W(0)).
    """
    margin = net_profit_margin(rm)
    if margin <= 0:
        return 1.0

    ctx = scale_context(rm, 0.0)
    denominator = 1.0 - rm.delta * ctx.w.initial_value
    return _clip(1.0 - margin * refracted_w(ctx, x, 0.0) / denominator)


def _ruin_denominators(law: PositiveLaw, ctx: ScaleContext, r: float) -> Dict[str, float]:
    delta = ctx.delta
    moment = first_moment(law)
    by_moment = moment - delta * r
    if by_moment <= 0:
        raise NumericError(
            "ruin denominator is not positive", {"first_moment": moment, "delta_r": delta * r}
        )

    by_scale = law.weighted_integral(lambda z: 1.0 - delta * float(ctx.w(z)))
    residual = abs(by_moment - by_scale) / by_moment
    if residual > DENOMINATOR_AGREEMENT:
        logger.warning(
            "ruin denominators disagree: %.17g vs %.17g (relative %.3g)", by_moment, by_scale, residual
        )

    return {
        "first_moment": moment,
        "denominator_moment": by_moment,
        "denominator_scale": by_scale,
        "denominator_residual": residual,
    }


def parisian_ruin_prob(query: ParisianQuery) -> RuinResult:
    """
    Probability of Parisian ruin with delay r for the refracted process.

    The survival part is written over the denominator built from 1 - delta W(z), so the
    integrand 1 - delta W(z) - (E[X_1] - delta) w(x; -z) carries the small probability
    directly; the first-moment denominator is computed as a cross-check.

    Args:
        query: Model, initial surplus and delay.

    Returns:
        The probability, with both denominators and (where available) the closed-form
        residual in diagnostics.

    Raises:
        UnsupportedOperationError: For the stable model.
        NumericError: If a denominator is not positive or quadrature fails.
    """
    rm = query.rm
    margin = net_profit_margin(rm)
    if margin <= 0:
        return RuinResult(1.0, RuinMethod.CLOSED_FORM, {"net_profit_margin": margin})

    _require_law_model(rm.x_model, "parisian_ruin_prob")
    law = build_law(rm.x_model, query.r)
    ctx = scale_context(rm, 0.0)
    diagnostics = _ruin_denominators(law, ctx, query.r)
    by_scale = diagnostics["denominator_scale"]
    delta = rm.delta
    x = query.x

    def ruin_density(z: float) -> float:
        return 1.0 - delta * float(ctx.w(z)) - margin * refracted_w(ctx, x, -z)

    numerator = law.weighted_integral(ruin_density, _shift_points(x), epsabs=SMALL_VALUE_EPSABS * by_scale)
    value = _clip(numerator / by_scale)
    diagnostics["net_profit_margin"] = margin

    if rm.x_model.kind in (ModelKind.CRAMER_LUNDBERG, ModelKind.BROWNIAN) and x >= 0:
        closed = closed_form_parisian(query).value
        diagnostics["closed_form_residual"] = abs(value - closed)

    logger.debug("Parisian ruin for %s: %.17g", query.to_dict(), value)
    return RuinResult(value, RuinMethod.HYBRID, diagnostics)


def closed_form_parisian(query: ParisianQuery) -> RuinResult:
    """
    Fully explicit Parisian ruin probability for Cramer-Lundberg and Brownian models, x >= 0.

    The kernel w(x; -z) is a constant plus a multiple of exp(k z) (k = eta/c - alpha, or -2c/sigma^2),
    and the integral of exp(k z) z P(X_r in dz) reduces to the first moment.

    Raises:
        UnsupportedOperationError: For other models or x < 0.
    """
    rm = query.rm
    model = rm.x_model
    x = query.x
    r = query.r
    delta = rm.delta
    margin = net_profit_margin(rm)
    if margin <= 0:
        return RuinResult(1.0, RuinMethod.CLOSED_FORM, {"net_profit_margin": margin})

    if x < 0 or model.kind not in (ModelKind.CRAMER_LUNDBERG, ModelKind.BROWNIAN):
        raise UnsupportedOperationError(
            "closed form needs a Cramer-Lundberg or Brownian model and x >= 0", type(model).__name__,
            "closed_form_parisian"
        )

    law = build_law(model, r)
    moment = first_moment(law)
    denominator = moment - delta * r
    if denominator <= 0:
        raise NumericError("ruin denominator is not positive", {"first_moment": moment, "delta_r": delta * r})

    c = model.c
    if isinstance(model, CramerLundbergExp):
        eta = model.eta
        alpha = model.alpha
        mean = mean_at_one(model)
        rate = eta / c - alpha
        exp_moment = c * alpha / eta * (moment - mean * r)
        k_term = 0.0
        if delta > 0:
            k_term = delta * eta * (
                math.expm1(rate * x) / (eta - c * alpha)
                + math.expm1(-eta * delta * x / (c * (c - delta))) / (delta * alpha)
                * math.exp((eta / (c - delta) - alpha) * x)
            )

        survival = moment / mean + (k_term / (margin * c) - eta / (c * alpha * mean) * math.exp(rate * x)) * exp_moment

    else:
        assert isinstance(model, BrownianRisk)
        rate = 2.0 * c / model.sigma ** 2
        rate_y = 2.0 * (c - delta) / model.sigma ** 2
        m_term = 0.0
        if delta > 0:
            m_term = delta / (c - delta) * (
                -math.expm1(-rate * x) / c - (math.exp(-rate_y * x) - math.exp(-rate * x)) / delta
            )

        survival = moment / c - (math.exp(-rate * x) / c - m_term) * (moment - c * r)

    value = _clip(1.0 - margin * survival / denominator)
    return RuinResult(value, RuinMethod.CLOSED_FORM, {"first_moment": moment, "denominator_moment": denominator})


def unrefracted_parisian(model: LevyModel, x: float, r: float) -> float:
    """
    Parisian ruin probability of the unrefracted process.

    1 - E[X_1] int W(x + z) z P(X_r in dz) / int z P(X_r in dz), evaluated without the
    refracted kernel.
    """
    mean = mean_at_one(model)
    if mean <= 0:
        return 1.0

    _require_law_model(model, "unrefracted_parisian")
    law = build_law(model, r)
    w = scale_function(model, 0.0)
    moment = first_moment(law)
    numerator = law.weighted_integral(
        lambda z: 1.0 - mean * float(w(x + z)), _shift_points(x), epsabs=SMALL_VALUE_EPSABS * moment
    )
    return _clip(numerator / moment)


class _DiscountedIntegrals:
    """
    The integrals of w^(q)(y; -z) and W_{y,delta}^(q,-q)(y + z) against (z/r) P(X_r in dz).
    """
    def __init__(self, query: ParisianQuery) -> None:
        _require_law_model(query.rm.x_model, "discounted Parisian quantities")
        self.q: float = query.q
        self.r: float = query.r
        self.ctx: ScaleContext = scale_context(query.rm, query.q)
        self.law: PositiveLaw = build_law(query.rm.x_model, query.r)

    def kernel_w(self, y: float) -> float:
        return self.law.weighted_integral(lambda z: refracted_w(self.ctx, y, -z), _shift_points(y)) / self.r

    def kernel_big_w(self, y: float) -> float:
        return self.law.weighted_integral(
            lambda z: kernel_W_delta(self.ctx, self.q, -self.q, y, y + z), _shift_points(y)
        ) / self.r

    def kernel_h(self, q_shift: float) -> float:
        return self.law.weighted_integral(lambda z: kernel_H_delta(self.ctx, self.q, q_shift, z)) / self.r

    def barrier_constant(self, a: float) -> Dict[str, float]:
        """E[e^{-q kappa} 1{kappa < kappa_a^+}] from x = 0, with its ingredients."""
        at_barrier = self.kernel_w(a)
        if at_barrier <= 0:
            raise NumericError("barrier integral is not positive", {"a": a, "integral": at_barrier})

        big_w = self.kernel_big_w(a)
        z_a = float(scale_z_y(self.ctx, a))
        return {
            "barrier_constant": (big_w - z_a) / at_barrier,
            "integral_w_a": at_barrier,
            "integral_big_w_a": big_w,
        }

    def assemble(self, x: float, constant: float) -> Dict[str, float]:
        integral_w = self.kernel_w(x)
        integral_big_w = self.kernel_big_w(x)
        value = float(scale_z_y(self.ctx, x)) + constant * integral_w - integral_big_w
        return {"value": value, "integral_w_x": integral_w, "integral_big_w_x": integral_big_w}


def parisian_laplace_to_barrier(query: ParisianQuery) -> RuinResult:
    """
    E_x[e^{-q (kappa_r - r)} 1{kappa_r < kappa_a^+}], Parisian ruin before reaching the barrier a.

    Raises:
        ValidationError: If the query has no finite barrier.
    """
    _require_barrier(query)
    if query.x == query.a:
        return RuinResult(0.0, RuinMethod.CLOSED_FORM, {})

    integrals = _DiscountedIntegrals(query)
    diagnostics = integrals.barrier_constant(query.a)
    assembled = integrals.assemble(query.x, diagnostics["barrier_constant"])
    value = _clip(assembled.pop("value"), math.exp(query.q * query.r))
    diagnostics.update(assembled)
    return RuinResult(value, RuinMethod.HYBRID, diagnostics)


def parisian_laplace(query: ParisianQuery, check_barrier_limit: bool = True) -> RuinResult:
    """
    E_x[e^{-q (kappa_r - r)} 1{kappa_r < inf}], the shifted Laplace transform of the Parisian ruin time.

    At q = 0 this is the ruin probability.  For q > 0 the constant from x = 0 is built from
    the exponential kernels H_delta^(q,-q) and H_delta^(q,0); it is recomputed as the
    constant with a distant barrier and any discrepancy above the tolerance is logged.

    Args:
        query: Model, initial surplus, delay and discount rate (the barrier is ignored).
        check_barrier_limit: Whether to run the distant-barrier cross-check.

    Returns:
        The value with the constant and cross-check in diagnostics.
    """
    if query.q == 0:
        return parisian_ruin_prob(query)

    integrals = _DiscountedIntegrals(query)
    rm = query.rm
    q = query.q
    varphi_q = integrals.ctx.varphi_q
    numerator = integrals.kernel_h(-q) - q / varphi_q - rm.delta
    denominator = integrals.kernel_h(0.0) - rm.delta * math.exp(q * query.r)
    if denominator == 0 or not math.isfinite(denominator):
        raise NumericError("discounted ruin denominator is degenerate", {"denominator": denominator, "q": q})

    constant = numerator / denominator
    diagnostics = {"constant": constant, "constant_numerator": numerator, "constant_denominator": denominator}

    if check_barrier_limit:
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                limit = integrals.barrier_constant(max(BARRIER_LIMIT, query.x + 1.0))["barrier_constant"]

        except (NumericError, OverflowError) as e:
            logger.debug("barrier-limit cross-check skipped: %s", e)
            limit = math.nan

        if math.isfinite(limit):
            discrepancy = abs(limit - constant)
            diagnostics["barrier_limit_discrepancy"] = discrepancy
            if discrepancy > BARRIER_LIMIT_TOLERANCE:
                logger.warning(
                    "discounted ruin constant %.12g differs from its barrier limit %.12g by %.3g",
                    constant, limit, discrepancy
                )

        else:
            logger.debug("barrier-limit cross-check skipped: non-finite value")

    assembled = integrals.assemble(query.x, constant)
    value = _clip(assembled.pop("value"), math.exp(q * query.r))
    diagnostics.update(assembled)
    return RuinResult(value, RuinMethod.HYBRID, diagnostics)


def exit_up_before_parisian(query: ParisianQuery) -> RuinResult:
    """
    E_x[e^{-q kappa_a^+} 1{kappa_a^+ < kappa_r}], reaching the barrier before Parisian ruin.
    """
    _require_barrier(query)
    if query.x == query.a:
        return RuinResult(1.0, RuinMethod.CLOSED_FORM, {})

    integrals = _DiscountedIntegrals(query)
    at_x = integrals.kernel_w(query.x)
    at_a = integrals.kernel_w(query.a)
    if at_a <= 0:
        raise NumericError("barrier integral is not positive", {"a": query.a, "integral": at_a})

    return RuinResult(
        _clip(at_x / at_a), RuinMethod.HYBRID, {"integral_w_x": at_x, "integral_w_a": at_a}
    )


def first_passage_up_u(rm: RefractedModel, x: float, b: float, q: float) -> float:
    """
    E_x[e^{-q kappa_b^+} 1{kappa_b^+ < inf}] for the refracted process, x <= b and b >= 0.

    Written as exp(Phi(q) (x - b)) times a ratio of (1 + delta Phi(q) int_0^y e^{-Phi(q) u} WY^(q)(u) du)
    terms, so nothing overflows for distant levels.
    """
    if b < 0:
        raise ValidationError("level 'b' must be nonnegative", "b", b)

    if x > b:
        raise ValidationError("initial surplus 'x' must not exceed the level 'b'", "x", x)

    ctx = scale_context(rm, q)
    rate = ctx.phi_q

    def bracket(y: float) -> float:
        if y < 0 or rm.delta == 0:
            return 1.0

        return 1.0 + rm.delta * rate * float(ctx.w_y.exp_integral(rate, y))

    return _clip(math.exp(rate * (x - b)) * bracket(x) / bracket(b))


def overshoot_laplace_y(rm: RefractedModel, x: float, theta: float) -> float:
    """
    E_x[e^{theta Y_{nu_0^-}} 1{nu_0^- < inf}] for x, theta > 0.

    The growing exp(theta x) part cancels against the Laplace transform of the Y scale
    function whenever theta exceeds every root; the remaining sum is evaluated directly.
    """
    if x <= 0:
        raise ValidationError("initial surplus 'x' must be strictly positive", "x", x)

    if theta <= 0:
        raise ValidationError("'theta' must be strictly positive", "theta", theta)

    ctx = scale_context(rm, 0.0)
    psi_y = laplace_exponent(rm.x_model, theta) - rm.delta * theta
    w_y = ctx.w_y
    exp_sum = w_y.exp_sum
    beyond_roots = theta > ctx.varphi_q

    if exp_sum is not None and beyond_roots:
        rates = exp_sum.rates
        tail = (exp_sum.coefs * np.exp(rates * x) * rates / (theta * (theta - rates))).sum().real
        value = psi_y * (float(tail) + exp_sum.slope / theta ** 2)

    elif exp_sum is None and beyond_roots:
        base = float(w_y(x))
        value = psi_y * integrate(lambda u: math.exp(-theta * u) * (float(w_y(x + u)) - base), 0.0, 40.0 / theta)

    else:
        value = (
            math.exp(theta * x) * (1.0 - psi_y * float(w_y.exp_integral(theta, x)))
            - psi_y / theta * float(w_y(x))
        )

    return _clip(value)


def tau_up_within_r(model: LevyModel, x: float, r: float) -> float:
    """P_x(tau_0^+ <= r) = int W(x + z) (z/r) P(X_r in dz) for x < 0."""
    if x >= 0:
        raise ValidationError("initial surplus 'x' must be negative", "x", x)

    _require_law_model(model, "tau_up_within_r")
    law = build_law(model, r)
    w = scale_function(model, 0.0)
    return _clip(law.weighted_integral(lambda z: float(w(x + z)), _shift_points(x)) / r)


def lemma_E_L3(rm: RefractedModel, x: float, r: float) -> float:
    """
    E_x[P_{Y_{nu_0^-}}(tau_0^+ <= r) 1{nu_0^- < inf}], the chance an excursion below 0 recovers within r.
    """
    _require_law_model(rm.x_model, "lemma_E_L3")
    ctx = scale_context(rm, 0.0)
    law = build_law(rm.x_model, r)
    w_y_x = float(ctx.w_y(x))
    integral = law.weighted_integral(lambda z: refracted_w(ctx, x, -z) - w_y_x, _shift_points(x)) / r
    return integral + rm.delta * w_y_x


def _recovery_ratio(ctx: ScaleContext, x: float, a: float) -> float:
    if a < 0:
        raise ValidationError("barrier 'a' must be nonnegative", "a", a)

    if x > a:
        raise ValidationError("initial surplus 'x' must not exceed the barrier 'a'", "x", x)

    at_a = float(ctx.w_y(a))
    if at_a <= 0:
        raise ValidationError("the Y scale function vanishes at the barrier", "a", a)

    return float(ctx.w_y(x)) / at_a


def _recovery_integral(rm: RefractedModel, x: float, r: float, q: float, a: float,
                    kernel: Callable[[ScaleContext, float, float], float]) -> float:
    _require_law_model(rm.x_model, "recovery_expectation")
    ctx = scale_context(rm, q)
    ratio = _recovery_ratio(ctx, x, a)
    law = build_law(rm.x_model, r)
    points = _shift_points(x) + _shift_points(a)
    return law.weighted_integral(lambda z: kernel(ctx, x, z) - ratio * kernel(ctx, a, z), points) / r


def lemma_E_L1(rm: RefractedModel, x: float, r: float, q: float, a: float) -> float:
    """
    E_x[e^{-q nu_0^-} E_{Y_{nu_0^-}}[e^{-q tau_0^+} 1{tau_0^+ <= r}] 1{nu_0^- < nu_a^+}].
    """
    integral = _recovery_integral(rm, x, r, q, a, lambda ctx, y, z: refracted_w(ctx, y, -z))
    return math.exp(-q * r) * integral


def lemma_E_L2(rm: RefractedModel, x: float, r: float, q: float, a: float) -> float:
    """
    E_x[e^{-q nu_0^-} P_{Y_{nu_0^-}}(tau_0^+ <= r) 1{nu_0^- < nu_a^+}].
    """
    return _recovery_integral(rm, x, r, q, a, lambda ctx, y, z: kernel_W_delta(ctx, q, -q, y, y + z))
