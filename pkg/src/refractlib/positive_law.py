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
The law of the positive part of X_r and the weighted integrals built on it.

Every delayed-ruin formula integrates a kernel against z P(X_r in dz) over z > 0.  A
PositiveLaw bundles the density of X_r on the positive half-line, the atom that a
bounded-variation model places at c r, and the cutoff beyond which the tail is negligible.
"""

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import gammainc, gammaln, ndtr
from scipy.stats import norm, poisson

from .levy_model import (
    BrownianRisk, CramerLundbergExp, JumpDiffusionPhaseType, LevyModel, ModelKind, phi_inverse
)
from .quadrature import EPSABS, EPSREL, integrate
from .refract_errors import NumericError, UnsupportedOperationError, ValidationError
from .scale_functions import scale_function

logger = logging.getLogger(__name__)

# Series stop once a term falls below this fraction of the running sum ...
SERIES_TOLERANCE = 1e-15

# ... and at least this many terms have been summed.
SERIES_MIN_TERMS = 12

SERIES_MAX_TERMS = 400

# Gaussian tails are cut this many standard deviations from the mean.
GAUSSIAN_WIDTH = 12.0

TAIL_TOLERANCE = 1e-10


def _truncated_sum(log_terms: np.ndarray, what: str) -> float:
    """
    Sum exp(log_terms) in order, stopping under the series rule.

    Raises:
        NumericError: If the cap is reached before the terms are negligible.
    """
    terms = np.exp(log_terms)
    partial = np.cumsum(terms)
    for index in range(SERIES_MIN_TERMS - 1, len(terms)):
        if terms[index] <= SERIES_TOLERANCE * partial[index]:
            return float(partial[index])

    raise NumericError(
        f"{what} series did not converge within {SERIES_MAX_TERMS} terms",
        {"last_term": float(terms[-1]), "sum": float(partial[-1])}
    )


def _signed_truncated_sum(terms: np.ndarray, what: str) -> float:
    partial = np.cumsum(terms)
    magnitude = np.cumsum(np.abs(terms))
    for index in range(SERIES_MIN_TERMS - 1, len(terms)):
        if abs(terms[index]) <= SERIES_TOLERANCE * magnitude[index]:
            return float(partial[index])

    raise NumericError(
        f"{what} series did not converge within {SERIES_MAX_TERMS} terms",
        {"last_term": float(terms[-1]), "sum": float(partial[-1])}
    )


_SERIES_INDEX = np.arange(SERIES_MAX_TERMS, dtype=float)


def _cramer_lundberg_density(model: CramerLundbergExp, r: float, z: float) -> float:
    """Absolutely continuous part of P(X_r in dz) for z < c r."""
    gap = model.c * r - z
    if gap <= 0:
        return 0.0

    m = _SERIES_INDEX
    log_terms = (
        (m + 1.0) * math.log(model.alpha * model.eta * r) + m * math.log(gap)
        - gammaln(m + 1.0) - gammaln(m + 2.0)
        - model.eta * r - model.alpha * gap
    )
    return _truncated_sum(log_terms, "compound Poisson density")


def _cramer_lundberg_first_moment(model: CramerLundbergExp, r: float) -> float:
    """
    Closed form of the integral of z P(X_r in dz) over z > 0.

    Uses the regularised lower incomplete gamma function.
    """
    top = model.c * r
    m = _SERIES_INDEX
    weights = np.exp((m + 1.0) * math.log(model.eta * r) - gammaln(m + 2.0))
    bracket = top * gammainc(m + 1.0, top * model.alpha) - (m + 1.0) / model.alpha * gammainc(m + 2.0, top * model.alpha)
    series = _signed_truncated_sum(weights * bracket, "compound Poisson first moment")
    return math.exp(-model.eta * r) * (top + series)


def _brownian_first_moment(model: BrownianRisk, r: float) -> float:
    scale = model.sigma * math.sqrt(r)
    mean = model.c * r
    return scale / math.sqrt(2.0 * math.pi) * math.exp(-0.5 * (mean / scale) ** 2) + mean * float(ndtr(mean / scale))


class _ClaimSumDensity:
    """
    Density of the aggregate claims over [0, r] for phase-type claims, on (0, y_max].

    The k-fold convolutions are phase-type laws with block bidiagonal generators;
    uniformising the block chain at rate theta = max |T_ii| gives

        h(y) = sum_n Poisson(n; theta y) h_n,    h_n = sum_k Poisson(k; eta r) G[n, k],

    where G[n, k] is the exit flow of block k - 1 after n uniformised steps.
    """
    def __init__(self, model: JumpDiffusionPhaseType, r: float, y_max: float) -> None:
        t_mat = model.generator
        alpha = model.initial
        exit_vector = model.exit_vector
        self.theta: float = float(np.max(np.abs(np.diag(t_mat))))
        jump = self.theta * y_max
        self.steps: int = int(math.ceil(jump + GAUSSIAN_WIDTH * math.sqrt(jump) + 30.0))
        claims_mean = model.eta * r
        blocks = int(math.ceil(claims_mean + GAUSSIAN_WIDTH * math.sqrt(claims_mean) + 30.0))
        blocks = min(blocks, self.steps + 1)

        transition = np.eye(model.order) + t_mat / self.theta
        claim_weights = poisson.pmf(np.arange(1, blocks + 1), claims_mean)
        state = np.zeros((blocks, model.order))
        state[0] = alpha
        self.mixture: np.ndarray = np.zeros(self.steps + 1)
        for n in range(self.steps + 1):
            exits = state @ exit_vector
            self.mixture[n] = float(exits @ claim_weights)
            advanced = state @ transition
            advanced[1:] += np.outer(exits[:-1] / self.theta, alpha)
            state = advanced

        logger.debug(
            "claim-sum density: theta=%g, %d uniformised steps, %d claim blocks", self.theta, self.steps, blocks
        )

    def __call__(self, y: float) -> float:
        if y <= 0:
            return 0.0

        weights = poisson.pmf(np.arange(self.steps + 1), self.theta * y)
        return float(weights @ self.mixture)


@dataclass(frozen=True, eq=False)
class PositiveLaw:
    """
    The law of X_r restricted to (0, inf).

    Attributes:
        model (LevyModel): The Levy model.
        r (float): Delay horizon.
        density (Callable[[float], float]): Density of the absolutely continuous part.
        atom_location (Optional[float]): Location of the atom, c r, for bounded-variation models.
        atom_mass (float): Mass of the atom.
        z_min (float): Lower end of the integration range (0 unless the density is negligible below).
        z_max (float): Upper cutoff with a negligible tail beyond it.
        kinks (Tuple[float, ...]): Points where the density is not smooth.
    """
    model: LevyModel
    r: float
    density: Callable[[float], float]
    atom_location: Optional[float] = None
    atom_mass: float = 0.0
    z_min: float = 0.0
    z_max: float = 0.0
    kinks: Tuple[float, ...] = field(default_factory=tuple)

    def weighted_integral(self, f: Callable[[float], float], points: Iterable[float] = (),
                          upper: Optional[float] = None, epsabs: float = EPSABS, epsrel: float = EPSREL) -> float:
        """
        Integral of f(z) z P(X_r in dz) over z > 0.

        Args:
            f: The kernel; only evaluated on (0, inf).
            points: Extra break points (kinks or jumps of f).
            upper: Override of the upper cutoff.
            epsabs: Absolute quadrature tolerance.
            epsrel: Relative quadrature tolerance.

        Returns:
            Atom contribution plus the quadrature over the density.
        """
        top = self.z_max if upper is None else upper
        value = 0.0
        if self.atom_location is not None and self.atom_mass > 0 and self.atom_location > 0:
            value += self.atom_mass * self.atom_location * f(self.atom_location)

        breaks = list(self.kinks) + list(points)
        value += integrate(
            lambda z: f(z) * z * self.density(z), self.z_min, top, points=breaks, epsabs=epsabs, epsrel=epsrel
        )
        return value

    def certify_tail(self, f: Callable[[float], float], points: Iterable[float] = ()) -> float:
        """
        Compare the weighted integral of f with the cutoff doubled.

        Returns:
            The relative difference.

        Raises:
            NumericError: If the difference exceeds the tail tolerance.
        """
        points = list(points)
        base = self.weighted_integral(f, points)
        extended = self.weighted_integral(f, points, upper=2.0 * self.z_max)
        difference = abs(extended - base) / max(abs(extended), 1e-300)
        if difference > TAIL_TOLERANCE:
            raise NumericError(
                "tail beyond the cutoff is not negligible",
                {"z_max": self.z_max, "base": base, "extended": extended, "relative_difference": difference}
            )

        return difference

    def total_mass(self) -> float:
        """Atom mass plus the density integrated over the positive range."""
        return self.atom_mass + integrate(self.density, self.z_min, self.z_max, points=self.kinks)


def _check_horizon(r: float) -> None:
    if not math.isfinite(r) or r <= 0:
        raise ValidationError("delay horizon 'r' must be strictly positive", "r", r)


@functools.lru_cache(maxsize=64)
def build_law(model: LevyModel, r: float) -> PositiveLaw:
    """
    Build the positive-part law of X_r.

    Args:
        model: A Cramer-Lundberg, Brownian or phase-type model.
        r: Delay horizon, strictly positive.

    Returns:
        The law.

    Raises:
        ValidationError: If r is not strictly positive.
        UnsupportedOperationError: For the stable model.
    """
    _check_horizon(r)
    top = model.c * r
    if model.kind == ModelKind.CRAMER_LUNDBERG:
        assert isinstance(model, CramerLundbergExp)
        return PositiveLaw(
            model=model,
            r=r,
            density=lambda z: _cramer_lundberg_density(model, r, z),
            atom_location=top,
            atom_mass=math.exp(-model.eta * r),
            z_min=0.0,
            z_max=top,
        )

    if model.kind == ModelKind.BROWNIAN:
        assert isinstance(model, BrownianRisk)
        scale = model.sigma * math.sqrt(r)
        gaussian = norm(loc=top, scale=scale)
        return PositiveLaw(
            model=model,
            r=r,
            density=lambda z: float(gaussian.pdf(z)),
            z_min=max(0.0, top - GAUSSIAN_WIDTH * scale),
            z_max=max(0.0, top + GAUSSIAN_WIDTH * scale),
            kinks=(top,) if top > 0 else (),
        )

    if model.kind == ModelKind.PHASE_TYPE:
        assert isinstance(model, JumpDiffusionPhaseType)
        no_claims = math.exp(-model.eta * r)
        if model.sigma == 0:
            claims = _ClaimSumDensity(model, r, top)
            return PositiveLaw(
                model=model,
                r=r,
                density=lambda z: claims(top - z),
                atom_location=top,
                atom_mass=no_claims,
                z_min=0.0,
                z_max=top,
            )

        scale = model.sigma * math.sqrt(r)
        z_max = max(0.0, top + GAUSSIAN_WIDTH * scale)
        claims = _ClaimSumDensity(model, r, z_max)

        def jump_diffusion_density(z: float) -> float:
            centre = top - z
            lower = max(0.0, centre - GAUSSIAN_WIDTH * scale)
            upper = centre + GAUSSIAN_WIDTH * scale
            smeared = 0.0
            if upper > lower:
                smeared = integrate(
                    lambda y: claims(y) * float(norm.pdf(centre - y, scale=scale)), lower, upper,
                    points=[centre], epsabs=EPSABS * 1e-3
                )

            return no_claims * float(norm.pdf(z - top, scale=scale)) + smeared

        return PositiveLaw(model=model, r=r, density=jump_diffusion_density, z_min=0.0, z_max=z_max)

    raise UnsupportedOperationError(
        "the law of X_r is not available for the stable model", type(model).__name__, "build_law"
    )


def first_moment(law: PositiveLaw) -> float:
    """
    Integral of z P(X_r in dz) over z > 0.

    Closed forms for the Cramer-Lundberg and Brownian models, quadrature otherwise.
    """
    model = law.model
    if model.kind == ModelKind.CRAMER_LUNDBERG:
        assert isinstance(model, CramerLundbergExp)
        return _cramer_lundberg_first_moment(model, law.r)

    if model.kind == ModelKind.BROWNIAN:
        assert isinstance(model, BrownianRisk)
        return _brownian_first_moment(model, law.r)

    return law.weighted_integral(lambda z: 1.0)


def weighted_integral(law: PositiveLaw, f: Callable[[float], float], points: Iterable[float] = (),
                      epsabs: float = EPSABS, epsrel: float = EPSREL) -> float:
    """Integral of f(z) z P(X_r in dz) over z > 0; divide by r for the (z/r) weighting."""
    return law.weighted_integral(f, points, epsabs=epsabs, epsrel=epsrel)


def exp_kernel_identity_check(law: PositiveLaw, q: float) -> float:
    """
    Relative residual of the integral of W^(q)(z) (z/r) P(X_r in dz) against exp(q r).
    """
    w = scale_function(law.model, q)
    left = law.weighted_integral(lambda z: float(w(z))) / law.r
    expected = math.exp(q * law.r)
    return abs(left - expected) / expected


def _r_grid(theta: float, nodes: int) -> np.ndarray:
    if theta <= 0:
        raise ValidationError("audit rate 'theta' must be strictly positive", "theta", theta)

    if nodes < 2:
        raise ValidationError("audit grid needs at least two nodes", "nodes", nodes)

    top = 40.0 / theta
    return np.geomspace(top * 1e-8, top, nodes)


def _laplace_in_r(model: LevyModel, theta: float, nodes: int, inner: Callable[[PositiveLaw], float]) -> float:
    grid = _r_grid(theta, nodes)
    values = np.array([math.exp(-theta * r) * inner(build_law(model, float(r))) / r for r in grid])
    return float(trapezoid(values, grid))


def laplace_tail_audit(model: LevyModel, theta: float, y: float, nodes: int = 2000) -> Tuple[float, float]:
    """
    Laplace transform in r of the integral of (z/r) P(X_r in dz) over z > y, against exp(-Phi(theta) y) / Phi(theta).

    Returns:
        (numerical value, closed form).
    """
    if y < 0:
        raise ValidationError("audit level 'y' must be nonnegative", "y", y)

    numeric = _laplace_in_r(
        model, theta, nodes, lambda law: law.weighted_integral(lambda z: 1.0 if z >= y else 0.0, points=[y])
    )
    rate = phi_inverse(model, theta)
    return numeric, math.exp(-rate * y) / rate


def laplace_scale_audit(model: LevyModel, theta: float, q: float, y: float, nodes: int = 2000) -> Tuple[float, float]:
    """
    Laplace transform in r of the integral of W^(q)(z - y) (z/r) P(X_r in dz), against exp(-Phi(theta) y) / (theta - q).

    Returns:
        (numerical value, closed form).
    """
    if theta <= q:
        raise ValidationError("audit rate 'theta' must exceed q", "theta", theta)

    w = scale_function(model, q)
    numeric = _laplace_in_r(
        model, theta, nodes, lambda law: law.weighted_integral(lambda z: float(w(z - y)), points=[y])
    )
    return numeric, math.exp(-phi_inverse(model, theta) * y) / (theta - q)
