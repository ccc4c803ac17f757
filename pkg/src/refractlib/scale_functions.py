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
Scale functions of X and Y = X - delta t, the refracted kernel and the composite kernels.

The rational models use exponential sums over the roots of psi(lambda) - delta lambda = q;
every convolution of two such sums has a closed form.  The stable model is only available
at q = 0, where its scale function is expressed with the scaled complementary error function.
Every kernel can also be evaluated by adaptive quadrature, which serves as an oracle.
"""

import functools
import logging
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Optional, Union

import numpy as np
from scipy.special import erfcx

from .levy_model import LevyModel, ModelKind, RefractedModel, phi_inverse, varphi_inverse
from .partial_fractions import ExpSum, RootSystem, convolve, model_root_system
from .quadrature import integrate
from .refract_errors import NumericError, UnsupportedOperationError, ValidationError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Relative disagreement tolerated between the largest real root and the bracketed right-inverse.
RIGHT_INVERSE_AGREEMENT = 1e-7


class KernelMethod(IntEnum):
    """
    How a convolution kernel is evaluated.
    """
    AUTO: int = 0
    CLOSED_FORM: int = 1
    QUADRATURE: int = 2


def _as_array(x: ArrayLike) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _as_result(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


class ScaleFunction:
    """
    A q-scale function on the real line, vanishing on (-inf, 0).

    Attributes:
        initial_value (float): W(0+).
        exp_sum (Optional[ExpSum]): Exponential-sum form on [0, inf), if one exists.
        pure_sum (Optional[ExpSum]): exp_sum with its constant folded in, when there is no linear part.
        pure_derivative (Optional[ExpSum]): Exponential-sum form of W'.
    """
    initial_value: float = 0.0
    exp_sum: Optional[ExpSum] = None
    pure_sum: Optional[ExpSum] = None
    pure_derivative: Optional[ExpSum] = None

    def __call__(self, x: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def derivative(self, x: ArrayLike) -> ArrayLike:
        """W'(x) for x > 0 and 0 for x < 0."""
        raise NotImplementedError

    def integral(self, x: ArrayLike) -> ArrayLike:
        """Integral of W over [0, x]."""
        return self.exp_integral(0.0, x)

    def exp_integral(self, theta: float, x: ArrayLike) -> ArrayLike:
        """Integral of exp(-theta y) W(y) over [0, x]."""
        raise NotImplementedError


class PartialFractionScale(ScaleFunction):
    """
    Scale function of a rational model, a finite sum of exponentials on [0, inf).
    """
    def __init__(self, system: RootSystem) -> None:
        self.system: RootSystem = system
        self.exp_sum = system.scale
        self.pure_sum = system.scale.as_pure()
        self.pure_derivative = system.scale.derivative().as_pure()
        self.initial_value = max(float(system.scale(0.0)), 0.0)

    def __call__(self, x: ArrayLike) -> ArrayLike:
        x = _as_array(x)
        value = np.maximum(self.exp_sum(np.maximum(x, 0.0)), 0.0)
        return _as_result(np.where(x < 0, 0.0, value))

    def derivative(self, x: ArrayLike) -> ArrayLike:
        x = _as_array(x)
        value = self.exp_sum.derivative()(np.maximum(x, 0.0))
        return _as_result(np.where(x < 0, 0.0, value))

    def exp_integral(self, theta: float, x: ArrayLike) -> ArrayLike:
        x = _as_array(x)
        value = self.exp_sum.exp_integral(theta, np.maximum(x, 0.0))
        return _as_result(np.where(x <= 0, 0.0, value))


class StableScale(ScaleFunction):
    """
    0-scale function of c lambda + lambda^{3/2}: W(x) = (1 - erfcx(c sqrt(x))) / c.

    Attributes:
        c (float): Drift, strictly positive.
    """
    def __init__(self, c: float) -> None:
        if c <= 0:
            raise ValidationError("stable scale function needs a positive drift", "c", c)

        self.c: float = c
        self.initial_value = 0.0

    def __call__(self, x: ArrayLike) -> ArrayLike:
        x = _as_array(x)
        root = np.sqrt(np.maximum(x, 0.0))
        return _as_result(np.where(x <= 0, 0.0, (1.0 - erfcx(self.c * root)) / self.c))

    def derivative(self, x: ArrayLike) -> ArrayLike:
        x = _as_array(x)
        positive = np.where(x > 0, x, 1.0)
        value = 1.0 / np.sqrt(np.pi * positive) - self.c * erfcx(self.c * np.sqrt(positive))
        return _as_result(np.where(x > 0, value, 0.0))

    def exp_integral(self, theta: float, x: ArrayLike) -> ArrayLike:
        if np.ndim(x) != 0:
            return np.array([self.exp_integral(theta, value) for value in np.ravel(x)]).reshape(np.shape(x))

        x = float(x)
        if x <= 0:
            return 0.0

        return integrate(lambda y: math.exp(-theta * y) * float(self(y)), 0.0, x)


@functools.lru_cache(maxsize=256)
def scale_function(model: LevyModel, q: float, delta: float = 0.0) -> ScaleFunction:
    """
    Return the q-scale function of psi(lambda) - delta lambda.

    Args:
        model: The Levy model X.
        q: Discount rate, nonnegative.
        delta: Drift reduction; 0 gives W^(q), delta gives the scale function of Y.

    Returns:
        The scale function.

    Raises:
        ValidationError: If q is negative or not finite.
        UnsupportedOperationError: For the stable model with q > 0.
        NumericError: If the root system is degenerate.
    """
    if not math.isfinite(q) or q < 0:
        raise ValidationError("scale function index must be finite and nonnegative", "q", q)

    if model.kind == ModelKind.STABLE:
        if q != 0:
            raise UnsupportedOperationError(
                "the stable model supports q = 0 only", type(model).__name__, "scale_function"
            )

        return StableScale(model.c - delta)

    return PartialFractionScale(model_root_system(model, q, delta))


@dataclass(frozen=True)
class ScaleContext:
    """
    Scale functions of a refracted model at one discount rate.

    Immutable after construction, so one context can be shared freely.

    Attributes:
        model (RefractedModel): The refracted model.
        q (float): Discount rate.
        w (ScaleFunction): W^(q) of X.
        w_y (ScaleFunction): The q-scale function of Y.
        phi_q (float): Phi(q), right-inverse of psi.
        varphi_q (float): varphi(q), right-inverse of psi(lambda) - delta lambda.
    """
    model: RefractedModel
    q: float
    w: ScaleFunction
    w_y: ScaleFunction
    phi_q: float
    varphi_q: float

    @property
    def delta(self) -> float:
        return self.model.delta

    @property
    def roots_x(self) -> Optional[np.ndarray]:
        return self.w.exp_sum.rates if self.w.exp_sum is not None else None

    @property
    def coefs_x(self) -> Optional[np.ndarray]:
        return self.w.exp_sum.coefs if self.w.exp_sum is not None else None

    @property
    def roots_y(self) -> Optional[np.ndarray]:
        return self.w_y.exp_sum.rates if self.w_y.exp_sum is not None else None

    @property
    def coefs_y(self) -> Optional[np.ndarray]:
        return self.w_y.exp_sum.coefs if self.w_y.exp_sum is not None else None


def _checked_right_inverse(bracketed: float, function: ScaleFunction, name: str, q: float) -> float:
    if not isinstance(function, PartialFractionScale):
        return bracketed

    from_roots = function.system.positive_root
    if abs(from_roots - bracketed) > RIGHT_INVERSE_AGREEMENT * max(1.0, bracketed):
        raise NumericError(
            f"{name}(q) from the root system disagrees with the bracketed root",
            {"q": q, "root_system": from_roots, "bracketed": bracketed}
        )

    return bracketed


@functools.lru_cache(maxsize=128)
def scale_context(rm: RefractedModel, q: float) -> ScaleContext:
    """
    Build (or fetch the cached) scale context of a refracted model.

    Args:
        rm: The refracted model.
        q: Discount rate, nonnegative.

    Returns:
        The context holding W^(q), the Y scale function and both right-inverses.
    """
    w = scale_function(rm.x_model, q)
    w_y = scale_function(rm.x_model, q, rm.delta)
    phi_q = _checked_right_inverse(phi_inverse(rm.x_model, q), w, "Phi", q)
    varphi_q = _checked_right_inverse(varphi_inverse(rm, q), w_y, "varphi", q)
    logger.debug("scale context for %s at q=%g: Phi=%.17g varphi=%.17g", rm.to_dict(), q, phi_q, varphi_q)
    return ScaleContext(model=rm, q=q, w=w, w_y=w_y, phi_q=phi_q, varphi_q=varphi_q)


def scale_w(ctx: ScaleContext, x: ArrayLike) -> ArrayLike:
    """W^(q)(x), zero for x < 0."""
    return ctx.w(x)


def scale_w_prime(ctx: ScaleContext, x: ArrayLike) -> ArrayLike:
    return ctx.w.derivative(x)


def scale_z(ctx: ScaleContext, x: ArrayLike) -> ArrayLike:
    """Z^(q)(x) = 1 + q times the integral of W^(q) over [0, x]."""
    if ctx.q == 0:
        return _as_result(np.ones_like(_as_array(x)))

    return _as_result(1.0 + ctx.q * _as_array(ctx.w.integral(x)))


def scale_w_y(ctx: ScaleContext, x: ArrayLike) -> ArrayLike:
    """The q-scale function of Y, zero for x < 0."""
    return ctx.w_y(x)


def scale_w_y_prime(ctx: ScaleContext, x: ArrayLike) -> ArrayLike:
    return ctx.w_y.derivative(x)


def scale_z_y(ctx: ScaleContext, x: ArrayLike) -> ArrayLike:
    if ctx.q == 0:
        return _as_result(np.ones_like(_as_array(x)))

    return _as_result(1.0 + ctx.q * _as_array(ctx.w_y.integral(x)))


def exp_integral(ctx: ScaleContext, theta: float, x: ArrayLike) -> ArrayLike:
    """Integral of exp(-theta y) W^(q)(y) over [0, x]."""
    return ctx.w.exp_integral(theta, x)


def exp_integral_y(ctx: ScaleContext, theta: float, x: ArrayLike) -> ArrayLike:
    return ctx.w_y.exp_integral(theta, x)


def _use_closed_form(method: KernelMethod, *sums: Optional[ExpSum]) -> bool:
    if method == KernelMethod.QUADRATURE:
        return False

    available = all(s is not None for s in sums)
    if method == KernelMethod.CLOSED_FORM and not available:
        raise UnsupportedOperationError("no closed form for this kernel", "", "closed_form")

    return available


def _pure(function: ScaleFunction, derivative: bool = False) -> Optional[ExpSum]:
    return function.pure_derivative if derivative else function.pure_sum


def refracted_w(ctx: ScaleContext, x: float, z: float, method: KernelMethod = KernelMethod.AUTO) -> float:
    """
    Refracted kernel w^(q)(x; z) = W^(q)(x - z) + delta 1{x >= 0} int_0^x WY^(q)(x - y) W^(q)'(y - z) dy.

    Args:
        ctx: The scale context.
        x: Position.
        z: Shift.
        method: Closed form over the roots, quadrature, or whichever is available.

    Returns:
        The kernel value.
    """
    direct = float(ctx.w(x - z))
    lower = max(z, 0.0)
    if x < 0 or ctx.delta == 0 or lower >= x:
        return direct

    derivative = _pure(ctx.w, derivative=True)
    w_y = _pure(ctx.w_y)
    if _use_closed_form(method, derivative, w_y):
        if z <= 0:
            term = convolve(derivative, w_y, x, -z)

        else:
            term = convolve(derivative, w_y, x - z, 0.0)

    else:
        term = integrate(lambda y: float(ctx.w_y(x - y)) * float(ctx.w.derivative(y - z)), lower, x)

    return direct + ctx.delta * float(term)


def _check_indices(p: float, q: float) -> None:
    if p < 0:
        raise ValidationError("kernel index p must be nonnegative", "p", p)

    if p + q < 0:
        raise ValidationError("kernel index p + q must be nonnegative", "q", q)


def kernel_W(ctx: ScaleContext, p: float, q: float, a: float, x: float, form: int = 2,
             method: KernelMethod = KernelMethod.AUTO) -> float:
    """
    Kernel W_a^(p,q)(x).

    The first form is W^(p)(x) + q int_a^x W^(p+q)(x - y) W^(p)(y) dy, the second
    W^(p+q)(x) - q int_0^a W^(p+q)(x - y) W^(p)(y) dy.  They agree whenever both exist; the
    first is always evaluated by quadrature.

    Args:
        ctx: The scale context (supplies the model).
        p: First index, nonnegative.
        q: Second index, with p + q nonnegative.
        a: Level.
        x: Argument.
        form: 1 or 2.
        method: Evaluation method for the second form.

    Returns:
        The kernel value.
    """
    _check_indices(p, q)
    model = ctx.model.x_model
    w_p = scale_function(model, p)
    w_pq = scale_function(model, p + q)
    if x < 0:
        return 0.0

    if form == 1:
        lower = max(a, 0.0)
        base = float(w_p(x))
        if q == 0 or x <= lower:
            return base

        return base + q * integrate(lambda y: float(w_pq(x - y)) * float(w_p(y)), lower, x)

    base = float(w_pq(x))
    length = min(a, x)
    if q == 0 or length <= 0:
        return base

    f = _pure(w_pq)
    g = _pure(w_p)
    if _use_closed_form(method, f, g):
        correction = convolve(f, g, length, x - length)

    else:
        correction = integrate(lambda y: float(w_pq(x - y)) * float(w_p(y)), 0.0, length)

    return base - q * float(correction)


@functools.lru_cache(maxsize=256)
def _kernel_h_sum(function: ScaleFunction, q: float, delta: float) -> Optional[ExpSum]:
    """Exponential sum of q W(u) - delta W'(u) on (0, inf)."""
    exp_sum = function.exp_sum
    if exp_sum is None:
        return None

    combined = ExpSum(
        exp_sum.rates,
        exp_sum.coefs * (q - delta * exp_sum.rates),
        q * exp_sum.slope,
        q * exp_sum.offset - delta * exp_sum.slope
    )
    return combined.as_pure()


def kernel_W_delta(ctx: ScaleContext, p: float, q: float, a: float, x: float, form: int = 2,
                   method: KernelMethod = KernelMethod.AUTO) -> float:
    """
    Kernel W_{a,delta}^(p,q)(x).

    With h(u) = q W^(p+q)(u) - delta W^(p+q)'(u) and WY^(p) the p-scale function of Y, the
    first form is (1 - delta W^(p+q)(0)) WY^(p)(x) + int_a^x h(x - y) WY^(p)(y) dy and the
    second is W^(p+q)(x) - int_0^a h(x - y) WY^(p)(y) dy.

    Args:
        ctx: The scale context (supplies the model and delta).
        p: First index, nonnegative.
        q: Second index, with p + q nonnegative.
        a: Level.
        x: Argument.
        form: 1 or 2.
        method: Evaluation method for the second form.

    Returns:
        The kernel value.
    """
    _check_indices(p, q)
    model = ctx.model.x_model
    delta = ctx.delta
    w_pq = scale_function(model, p + q)
    w_y_p = scale_function(model, p, delta)
    if x < 0:
        return 0.0

    def h(u: float) -> float:
        return q * float(w_pq(u)) - delta * float(w_pq.derivative(u))

    if form == 1:
        lower = max(a, 0.0)
        base = (1.0 - delta * w_pq.initial_value) * float(w_y_p(x))
        if x <= lower or (q == 0 and delta == 0):
            return base

        return base + integrate(lambda y: h(x - y) * float(w_y_p(y)), lower, x)

    base = float(w_pq(x))
    length = min(a, x)
    if length <= 0 or (q == 0 and delta == 0):
        return base

    f = _kernel_h_sum(w_pq, q, delta)
    g = _pure(w_y_p)
    if _use_closed_form(method, f, g):
        correction = convolve(f, g, length, x - length)

    else:
        correction = integrate(lambda y: h(x - y) * float(w_y_p(y)), 0.0, length)

    return base - float(correction)


def _exponential_kernel(rate: float, factor: float, function: ScaleFunction, x: float,
                        method: KernelMethod) -> float:
    """
    exp(rate x) (1 + factor int_0^x exp(-rate y) W(y) dy), with W's Laplace transform at rate
    equal to -1 / factor.

    Over the roots the growing exp(rate x) part cancels exactly, leaving
    factor sum_k c_k exp(lambda_k x) / (lambda_k - rate).
    """
    if x <= 0 or factor == 0:
        return math.exp(rate * x)

    pure = _pure(function)
    if _use_closed_form(method, pure) and not np.any(np.abs(pure.rates - rate) < 1e-12 * max(1.0, rate)):
        value = factor * (pure.coefs * np.exp(pure.rates * x) / (pure.rates - rate)).sum()
        return float(value.real)

    if method == KernelMethod.QUADRATURE or function.exp_sum is None:
        integral = integrate(lambda y: math.exp(-rate * y) * float(function(y)), 0.0, x)

    else:
        integral = float(function.exp_integral(rate, x))

    return math.exp(rate * x) * (1.0 + factor * integral)


def kernel_H(ctx: ScaleContext, p: float, q: float, x: float, method: KernelMethod = KernelMethod.AUTO) -> float:
    """Kernel H^(p,q)(x) = exp(Phi(p) x) (1 + q int_0^x exp(-Phi(p) y) W^(p+q)(y) dy)."""
    _check_indices(p, q)
    rate = phi_inverse(ctx.model.x_model, p)
    return _exponential_kernel(rate, q, scale_function(ctx.model.x_model, p + q), x, method)


def kernel_H_delta(ctx: ScaleContext, p: float, q: float, x: float,
                   method: KernelMethod = KernelMethod.AUTO) -> float:
    """Kernel H_delta^(p,q)(x) = exp(varphi(p) x) (1 + (q - delta varphi(p)) int_0^x exp(-varphi(p) y) W^(p+q)(y) dy)."""
    _check_indices(p, q)
    rate = varphi_inverse(ctx.model, p)
    factor = q - ctx.delta * rate
    return _exponential_kernel(rate, factor, scale_function(ctx.model.x_model, p + q), x, method)


def _convolution(f: Callable[[float], float], g: Callable[[float], float], x: float) -> float:
    """int_0^x f(x - y) g(y) dy by quadrature."""
    return integrate(lambda y: f(x - y) * g(y), 0.0, x)


def residual_a1(ctx: ScaleContext, p: float, q: float, x: float) -> float:
    """
    Residual of the convolution identity linking WY^(p) and W^(q).

    (q - p) int_0^x WY^(p)(x - y) W^(q)(y) dy
        = W^(q)(x) - WY^(p)(x) + delta (W^(q)(0) WY^(p)(x) + int_0^x WY^(p)(x - y) W^(q)'(y) dy)

    Both integrals are computed by quadrature, independently of the closed forms.
    """
    if x <= 0:
        return 0.0

    model = ctx.model.x_model
    w_q = scale_function(model, q)
    w_y_p = scale_function(model, p, ctx.delta)
    left = (q - p) * _convolution(lambda u: float(w_y_p(u)), lambda u: float(w_q(u)), x)
    derivative_term = _convolution(lambda u: float(w_y_p(u)), lambda u: float(w_q.derivative(u)), x)
    right = float(w_q(x)) - float(w_y_p(x)) + ctx.delta * (w_q.initial_value * float(w_y_p(x)) + derivative_term)
    return left - right


def residual_a2(ctx: ScaleContext, p: float, q: float, x: float) -> float:
    """Residual of (q - p) int_0^x W^(p)(x - y) W^(q)(y) dy = W^(q)(x) - W^(p)(x)."""
    if x <= 0:
        return 0.0

    model = ctx.model.x_model
    w_q = scale_function(model, q)
    w_p = scale_function(model, p)
    left = (q - p) * _convolution(lambda u: float(w_p(u)), lambda u: float(w_q(u)), x)
    return left - (float(w_q(x)) - float(w_p(x)))
