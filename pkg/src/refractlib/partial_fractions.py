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
Rational Laplace exponents and exponential-sum representations of scale functions.

For the Cramer-Lundberg, Brownian and phase-type models psi(lambda) - delta lambda is a
ratio of polynomials N(lambda) / D(lambda).  The q-scale function, whose Laplace transform
is D / (N - q D), is then a finite sum of exponentials over the roots of N - q D.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from .levy_model import (
    BrownianRisk, CramerLundbergExp, JumpDiffusionPhaseType, LevyModel, ModelKind, mean_at_one
)
from .refract_errors import NumericError, UnsupportedOperationError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Roots closer than this are treated as a multiple root.
ROOT_SEPARATION = 1e-8

# Smallest admissible |psi'| at a root.
MIN_ROOT_SLOPE = 1e-10

# Largest admissible imaginary residue relative to the real part.
IMAGINARY_RESIDUE = 1e-10

# Relative size of E[X_1] below which the exponent is treated as having a double root at 0.
ZERO_MEAN_TOLERANCE = 1e-13


@dataclass(frozen=True, eq=False)
class RationalExponent:
    """
    psi(lambda) - delta lambda written as numerator / denominator.

    Attributes:
        numerator (np.ndarray): Polynomial coefficients, highest power first.
        denominator (np.ndarray): Polynomial coefficients, highest power first.
    """
    numerator: np.ndarray
    denominator: np.ndarray

    def __call__(self, lam: complex) -> complex:
        return np.polyval(self.numerator, lam) / np.polyval(self.denominator, lam)


def _phase_type_adjugate_form(model: JumpDiffusionPhaseType) -> np.ndarray:
    """
    Coefficients of alpha adj(lambda I - T) t via the Faddeev-LeVerrier recursion.
    """
    t_mat = model.generator
    m = model.order
    char_poly = np.poly(t_mat)
    alpha = model.initial
    exit_vector = model.exit_vector

    coefficients = np.zeros(m)
    current = np.eye(m)
    coefficients[0] = alpha @ current @ exit_vector
    for k in range(1, m):
        current = t_mat @ current + char_poly[k] * np.eye(m)
        coefficients[k] = alpha @ current @ exit_vector

    return coefficients


def rational_exponent(model: LevyModel, delta: float = 0.0) -> RationalExponent:
    """
    Build psi(lambda) - delta lambda as a ratio of polynomials.

    Args:
        model: A Cramer-Lundberg, Brownian or phase-type model.
        delta: Drift reduction applied to the exponent.

    Returns:
        The rational form of the exponent, with an exact zero constant term in the numerator.

    Raises:
        UnsupportedOperationError: For the stable model, whose exponent is not rational.
    """
    if model.kind == ModelKind.CRAMER_LUNDBERG:
        assert isinstance(model, CramerLundbergExp)
        c = model.c - delta
        numerator = np.array([c, c * model.alpha - model.eta, 0.0])
        denominator = np.array([1.0, model.alpha])

    elif model.kind == ModelKind.BROWNIAN:
        assert isinstance(model, BrownianRisk)
        numerator = np.array([0.5 * model.sigma ** 2, model.c - delta, 0.0])
        denominator = np.array([1.0])

    elif model.kind == ModelKind.PHASE_TYPE:
        assert isinstance(model, JumpDiffusionPhaseType)
        denominator = np.poly(model.generator)
        gaussian_part = np.array([0.5 * model.sigma ** 2, model.c - delta, -model.eta])
        numerator = np.polyadd(np.polymul(gaussian_part, denominator), model.eta * _phase_type_adjugate_form(model))
        numerator = np.trim_zeros(numerator, "f")
        numerator[-1] = 0.0

    else:
        raise UnsupportedOperationError(
            "the stable Laplace exponent is not rational", type(model).__name__, "rational_exponent"
        )

    return RationalExponent(numerator=numerator, denominator=denominator)


def _exprel(rate: np.ndarray, x: ArrayLike) -> np.ndarray:
    """
    (exp(rate x) - 1) / rate, continuous through rate = 0.
    """
    rate = np.asarray(rate, dtype=complex)
    x = np.asarray(x, dtype=float)
    product = rate * x
    small = np.abs(product) < 1e-8
    safe_rate = np.where(small, 1.0, rate)
    series = x * (1.0 + 0.5 * product + product * product / 6.0)
    return np.where(small, series, (np.exp(product) - 1.0) / safe_rate)


@dataclass(frozen=True, eq=False)
class ExpSum:
    """
    f(x) = sum_k coefs[k] exp(rates[k] x) + slope x + offset.

    Complex-conjugate rates are kept in complex arithmetic; evaluation returns the real part.

    Attributes:
        rates (np.ndarray): Exponential rates (complex).
        coefs (np.ndarray): Coefficients for each rate (complex).
        slope (float): Coefficient of an additional linear term.
        offset (float): Additional constant term.
    """
    rates: np.ndarray
    coefs: np.ndarray
    slope: float = 0.0
    offset: float = 0.0

    @property
    def is_pure(self) -> bool:
        """True when there is no linear or constant part."""
        return self.slope == 0.0 and self.offset == 0.0

    def evaluate_complex(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        terms = self.coefs * np.exp(np.multiply.outer(x, self.rates))
        return terms.sum(axis=-1) + self.slope * x + self.offset

    def __call__(self, x: ArrayLike) -> ArrayLike:
        value = self.evaluate_complex(x).real
        return float(value) if np.ndim(value) == 0 else value

    def as_pure(self) -> Optional['ExpSum']:
        """
        The same function with any constant folded into a zero-rate exponential.

        Returns None when there is a linear part, which has no exponential form.
        """
        if self.slope != 0.0:
            return None

        if self.offset == 0.0:
            return self

        return ExpSum(np.append(self.rates, 0.0 + 0.0j), np.append(self.coefs, self.offset + 0.0j))

    def derivative(self) -> 'ExpSum':
        return ExpSum(self.rates, self.coefs * self.rates, 0.0, self.slope)

    def scaled(self, factor: float) -> 'ExpSum':
        return ExpSum(self.rates, self.coefs * factor, self.slope * factor, self.offset * factor)

    def exp_integral(self, theta: float, x: ArrayLike) -> ArrayLike:
        """
        Integral of exp(-theta y) f(y) over [0, x].
        """
        x = np.asarray(x, dtype=float)
        value = (self.coefs * _exprel(self.rates - theta, x[..., None])).sum(axis=-1)
        if self.offset:
            value = value + self.offset * _exprel(np.array(-theta, dtype=complex), x)

        if self.slope:
            if theta == 0:
                value = value + self.slope * 0.5 * x * x
            else:
                value = value + self.slope * (1.0 - np.exp(-theta * x) * (1.0 + theta * x)) / theta ** 2

        value = np.real(value)
        return float(value) if np.ndim(value) == 0 else value


def convolve(f: ExpSum, g: ExpSum, length: float, shift: ArrayLike) -> ArrayLike:
    """
    Closed form of the integral of g(length - u) f(u + shift) over u in [0, length].

    Both sums must be pure exponential sums.
    """
    if not (f.is_pure and g.is_pure):
        raise NumericError("closed-form convolution needs pure exponential sums")

    if length <= 0:
        return 0.0 if np.ndim(shift) == 0 else np.zeros_like(np.asarray(shift, dtype=float))

    # inner[j] = sum_i g_i exp(zeta_i L) (exp((rho_j - zeta_i) L) - 1) / (rho_j - zeta_i)
    differences = np.subtract.outer(f.rates, g.rates)
    inner = (g.coefs * np.exp(g.rates * length) * _exprel(differences, length)).sum(axis=1)
    shift = np.asarray(shift, dtype=float)
    value = (f.coefs * inner * np.exp(np.multiply.outer(shift, f.rates))).sum(axis=-1).real
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True, eq=False)
class RootSystem:
    """
    Roots of N(lambda) - q D(lambda) and the partial-fraction expansion of D / (N - q D).

    Attributes:
        roots (np.ndarray): All roots (complex).
        scale (ExpSum): The q-scale function as an exponential sum on [0, inf).
        positive_root (float): Largest real root, which is the right-inverse at q.
    """
    roots: np.ndarray
    scale: ExpSum
    positive_root: float

    @property
    def negative_roots(self) -> np.ndarray:
        return self.roots[self.roots.real < 0]


def _polish(poly: np.ndarray, derivative: np.ndarray, roots: np.ndarray) -> np.ndarray:
    polished = roots.astype(complex)
    for _ in range(2):
        slope = np.polyval(derivative, polished)
        step = np.where(slope != 0, np.polyval(poly, polished) / np.where(slope != 0, slope, 1.0), 0.0)
        polished = polished - step

    return polished


def _check_distinct(roots: np.ndarray, exponent_name: str) -> None:
    if len(roots) < 2:
        return

    gaps = np.abs(np.subtract.outer(roots, roots))
    np.fill_diagonal(gaps, np.inf)
    closest = float(gaps.min())
    if closest < ROOT_SEPARATION:
        raise NumericError(
            f"roots of {exponent_name} are not distinct", {"min_separation": closest, "threshold": ROOT_SEPARATION}
        )


def root_system(exponent: RationalExponent, q: float, mean: float, exponent_name: str = "psi") -> RootSystem:
    """
    Solve psi(lambda) = q over the complex plane and expand the scale function.

    Args:
        exponent: Rational form of the Laplace exponent.
        q: Nonnegative discount rate.
        mean: psi'(0+), used to detect a double root at 0 when q = 0.
        exponent_name: Name used in diagnostics.

    Returns:
        The root system and the exponential-sum scale function.

    Raises:
        NumericError: If roots are (nearly) multiple or the expansion is not real.
    """
    numerator = exponent.numerator
    denominator = exponent.denominator
    poly = np.polysub(numerator, q * denominator)
    poly_derivative = np.polyder(poly)
    slope = 0.0
    offset = 0.0

    if q == 0:
        reduced = numerator[:-1]
        scale_of_mean = max(1.0, float(np.max(np.abs(reduced))))
        if abs(mean) <= ZERO_MEAN_TOLERANCE * scale_of_mean:
            # Double root at 0: D / (lambda^2 S) gives a linear term.
            second = reduced[:-1]
            s0 = np.polyval(second, 0.0)
            s1 = np.polyval(np.polyder(second), 0.0) if len(second) > 1 else 0.0
            d0 = np.polyval(denominator, 0.0)
            d1 = np.polyval(np.polyder(denominator), 0.0) if len(denominator) > 1 else 0.0
            slope = float(d0 / s0)
            offset = float((d1 * s0 - d0 * s1) / s0 ** 2)
            others = np.roots(second) if len(second) > 1 else np.array([], dtype=complex)
            others = _polish(second, np.polyder(second), others) if len(others) else others.astype(complex)
            roots = others
            coefs = np.polyval(denominator, roots) / (roots * roots * np.polyval(np.polyder(second), roots))
            _check_distinct(np.concatenate([roots, [0.0]]), exponent_name)
            scale = ExpSum(roots, coefs, slope, offset)
            positive = 0.0
            logger.debug("%s at q=0 has a double root at 0; linear term %.6g", exponent_name, slope)
            return RootSystem(np.concatenate([roots, [0.0 + 0.0j]]), scale, positive)

        others = np.roots(reduced) if len(reduced) > 1 else np.array([], dtype=complex)
        others = _polish(reduced, np.polyder(reduced), others) if len(others) else others.astype(complex)
        roots = np.concatenate([[0.0 + 0.0j], others])

    else:
        roots = _polish(poly, poly_derivative, np.roots(poly))

    _check_distinct(roots, exponent_name)

    slopes = np.polyval(poly_derivative, roots)
    denominators_at_roots = np.polyval(denominator, roots)
    psi_slopes = np.abs(slopes / denominators_at_roots)
    if np.any(psi_slopes < MIN_ROOT_SLOPE):
        raise NumericError(
            f"near-multiple root of {exponent_name} = q", {"q": q, "min_slope": float(psi_slopes.min())}
        )

    coefs = denominators_at_roots / slopes
    real_roots = roots[np.abs(roots.imag) <= 1e-12 * np.maximum(1.0, np.abs(roots))].real
    positive = float(real_roots.max()) if len(real_roots) else 0.0
    expected_nonnegative = 2 if (q == 0 and mean < 0) else 1
    nonnegative = int(np.sum(roots.real >= -1e-14 * np.maximum(1.0, np.abs(roots))))
    if nonnegative != expected_nonnegative:
        raise NumericError(
            f"unexpected root configuration for {exponent_name} = q",
            {"q": q, "nonnegative_roots": nonnegative, "expected": expected_nonnegative}
        )

    logger.debug("%s = %g: %d roots, largest real root %.17g", exponent_name, q, len(roots), positive)
    return RootSystem(roots, ExpSum(roots, coefs), max(positive, 0.0))


def check_real(scale: ExpSum, points: Optional[List[float]] = None) -> None:
    """
    Verify the exponential sum is real-valued at a few sample points.

    Raises:
        NumericError: If an imaginary residue exceeds the tolerance.
    """
    for x in points if points is not None else [0.0, 0.5, 1.0, 5.0]:
        value = complex(scale.evaluate_complex(x))
        if abs(value.imag) > IMAGINARY_RESIDUE * max(abs(value.real), 1e-300):
            raise NumericError(
                "scale function expansion is not real", {"x": x, "real": value.real, "imag": value.imag}
            )


def model_root_system(model: LevyModel, q: float, delta: float = 0.0) -> RootSystem:
    """Root system of psi(lambda) - delta lambda = q for a rational model."""
    exponent = rational_exponent(model, delta)
    system = root_system(exponent, q, mean_at_one(model) - delta, "psi_Y" if delta else "psi")
    check_real(system.scale)
    return system
