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
Parametric spectrally negative Levy models and their refracted versions.

Four models are supported:
- CramerLundbergExp: compound Poisson claims with exponential sizes plus premium drift.
- BrownianRisk: drifted Brownian motion.
- JumpDiffusionPhaseType: drift, optional Brownian part and phase-type claims.
- StableThreeHalves: drift plus a spectrally negative 3/2-stable process.

A RefractedModel pairs a model X with a refraction rate delta; the process Y = X - delta t
is the same family with its drift lowered by delta.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Callable, Dict, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .refract_errors import NumericError, ValidationError

logger = logging.getLogger(__name__)

PROBABILITY_SUM_TOLERANCE = 1e-12


class ModelKind(IntEnum):
    """
    Model families understood by the library.
    """
    CRAMER_LUNDBERG: int = 0
    BROWNIAN: int = 1
    PHASE_TYPE: int = 2
    STABLE: int = 3


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValidationError(f"'{name}' must be finite", name, value)


def _check_positive(name: str, value: float) -> None:
    _check_finite(name, value)
    if value <= 0:
        raise ValidationError(f"'{name}' must be strictly positive", name, value)


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not math.isfinite(lam):
        raise ValidationError("Laplace exponent argument must be finite", "lambda", lam)

    if lam < 0:
        raise ValidationError("Laplace exponent argument must be nonnegative", "lambda", lam)

    return lam


@dataclass(frozen=True)
class CramerLundbergExp:
    """
    Cramer-Lundberg surplus with exponentially distributed claims.

    Attributes:
        c (float): Premium rate.
        eta (float): Claim arrival intensity.
        alpha (float): Rate of the exponential claim sizes.
    """
    c: float
    eta: float
    alpha: float

    kind = ModelKind.CRAMER_LUNDBERG

    def __post_init__(self) -> None:
        _check_positive("c", self.c)
        _check_positive("eta", self.eta)
        _check_positive("alpha", self.alpha)

    @property
    def has_bounded_variation(self) -> bool:
        return True

    @property
    def sigma(self) -> float:
        return 0.0

    def laplace_exponent(self, lam: float) -> float:
        return self.c * lam + self.eta * (self.alpha / (self.alpha + lam) - 1.0)

    def laplace_exponent_derivative(self, lam: float) -> float:
        return self.c - self.eta * self.alpha / (self.alpha + lam) ** 2

    def mean_at_one(self) -> float:
        return self.c - self.eta / self.alpha

    def with_drift(self, c: float) -> 'CramerLundbergExp':
        return dataclasses.replace(self, c=c)

    def to_dict(self) -> Dict[str, Any]:
        return {"model": "cramer_lundberg", "c": self.c, "eta": self.eta, "alpha": self.alpha}


@dataclass(frozen=True)
class BrownianRisk:
    """
    Brownian surplus X_t = x + c t + sigma B_t.

    Attributes:
        c (float): Drift.
        sigma (float): Volatility.
    """
    c: float
    sigma: float

    kind = ModelKind.BROWNIAN

    def __post_init__(self) -> None:
        _check_finite("c", self.c)
        _check_positive("sigma", self.sigma)

    @property
    def has_bounded_variation(self) -> bool:
        return False

    def laplace_exponent(self, lam: float) -> float:
        return self.c * lam + 0.5 * self.sigma ** 2 * lam ** 2

    def laplace_exponent_derivative(self, lam: float) -> float:
        return self.c + self.sigma ** 2 * lam

    def mean_at_one(self) -> float:
        return self.c

    def with_drift(self, c: float) -> 'BrownianRisk':
        return dataclasses.replace(self, c=c)

    def to_dict(self) -> Dict[str, Any]:
        return {"model": "brownian", "c": self.c, "sigma": self.sigma}


@dataclass(frozen=True)
class JumpDiffusionPhaseType:
    """
    Jump-diffusion surplus with phase-type distributed claims.

    The claim law has initial distribution `alpha_vec` and sub-generator `t_mat`; the exit
    vector is t = -T 1.  Sequences are stored as tuples so models stay hashable.

    Attributes:
        c (float): Premium rate.
        sigma (float): Volatility (zero for a pure jump model).
        eta (float): Claim arrival intensity.
        alpha_vec (Tuple[float, ...]): Initial phase distribution.
        t_mat (Tuple[Tuple[float, ...], ...]): Sub-generator matrix, row by row.
    """
    c: float
    sigma: float
    eta: float
    alpha_vec: Tuple[float, ...]
    t_mat: Tuple[Tuple[float, ...], ...]

    kind = ModelKind.PHASE_TYPE

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha_vec", tuple(float(v) for v in self.alpha_vec))
        object.__setattr__(self, "t_mat", tuple(tuple(float(v) for v in row) for row in self.t_mat))
        _check_finite("c", self.c)
        _check_finite("sigma", self.sigma)
        if self.sigma < 0:
            raise ValidationError("'sigma' must be nonnegative", "sigma", self.sigma)

        if self.sigma == 0 and self.c <= 0:
            raise ValidationError("'c' must be strictly positive for a pure jump model", "c", self.c)

        _check_positive("eta", self.eta)
        self._validate_phase_type()

    def _validate_phase_type(self) -> None:
        m = len(self.alpha_vec)
        if m == 0:
            raise ValidationError("'alpha_vec' must not be empty", "alpha_vec", self.alpha_vec)

        if len(self.t_mat) != m or any(len(row) != m for row in self.t_mat):
            raise ValidationError(f"'t_mat' must be a {m}x{m} matrix", "t_mat", self.t_mat)

        alpha = self.initial
        if np.any(~np.isfinite(alpha)) or np.any(alpha < 0):
            raise ValidationError("'alpha_vec' entries must be nonnegative", "alpha_vec", self.alpha_vec)

        if abs(alpha.sum() - 1.0) > PROBABILITY_SUM_TOLERANCE:
            raise ValidationError("'alpha_vec' entries must sum to 1", "alpha_vec", self.alpha_vec)

        t = self.generator
        if np.any(~np.isfinite(t)):
            raise ValidationError("'t_mat' entries must be finite", "t_mat", self.t_mat)

        off_diagonal = t - np.diag(np.diag(t))
        if np.any(np.diag(t) > 0) or np.any(off_diagonal < 0):
            raise ValidationError(
                "'t_mat' needs a nonpositive diagonal and nonnegative off-diagonal entries", "t_mat", self.t_mat
            )

        if np.any(t.sum(axis=1) > 0):
            raise ValidationError("'t_mat' row sums must be nonpositive", "t_mat", self.t_mat)

        if not np.any(self.exit_vector > 0):
            raise ValidationError("'t_mat' has no exit to absorption", "t_mat", self.t_mat)

    @property
    def order(self) -> int:
        return len(self.alpha_vec)

    @property
    def initial(self) -> np.ndarray:
        return np.array(self.alpha_vec, dtype=float)

    @property
    def generator(self) -> np.ndarray:
        return np.array(self.t_mat, dtype=float)

    @property
    def exit_vector(self) -> np.ndarray:
        return -self.generator.sum(axis=1)

    @property
    def has_bounded_variation(self) -> bool:
        return self.sigma == 0

    def _resolvent(self, lam: float) -> np.ndarray:
        m = self.order
        try:
            return np.linalg.solve(lam * np.eye(m) - self.generator, self.exit_vector)

        except np.linalg.LinAlgError as e:
            raise NumericError("phase-type resolvent is singular", {"lambda": lam}) from e

    def claim_transform(self, lam: float) -> float:
        """E[exp(-lambda C)] for a single claim C."""
        return float(self.initial @ self._resolvent(lam))

    def laplace_exponent(self, lam: float) -> float:
        return self.c * lam + 0.5 * self.sigma ** 2 * lam ** 2 + self.eta * (self.claim_transform(lam) - 1.0)

    def laplace_exponent_derivative(self, lam: float) -> float:
        m = self.order
        resolvent = self._resolvent(lam)
        second = np.linalg.solve(lam * np.eye(m) - self.generator, resolvent)
        return self.c + self.sigma ** 2 * lam - self.eta * float(self.initial @ second)

    def mean_claim(self) -> float:
        """Mean claim size -alpha T^{-1} 1."""
        m = self.order
        try:
            solved = np.linalg.solve(self.generator, np.ones(m))

        except np.linalg.LinAlgError as e:
            raise NumericError("phase-type sub-generator is singular") from e

        return float(-(self.initial @ solved))

    def mean_at_one(self) -> float:
        return self.c - self.eta * self.mean_claim()

    def with_drift(self, c: float) -> 'JumpDiffusionPhaseType':
        return dataclasses.replace(self, c=c)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": "phase_type",
            "c": self.c,
            "sigma": self.sigma,
            "eta": self.eta,
            "alpha_vec": list(self.alpha_vec),
            "t_mat": [list(row) for row in self.t_mat],
        }


@dataclass(frozen=True)
class StableThreeHalves:
    """
    Drift plus a spectrally negative 3/2-stable process, psi(lambda) = c lambda + lambda^{3/2}.

    Attributes:
        c (float): Drift.
    """
    c: float

    kind = ModelKind.STABLE

    def __post_init__(self) -> None:
        _check_positive("c", self.c)

    @property
    def has_bounded_variation(self) -> bool:
        return False

    @property
    def sigma(self) -> float:
        return 0.0

    def laplace_exponent(self, lam: float) -> float:
        return self.c * lam + lam ** 1.5

    def laplace_exponent_derivative(self, lam: float) -> float:
        return self.c + 1.5 * math.sqrt(lam)

    def mean_at_one(self) -> float:
        # The stable part contributes no drift at 0+.
        return self.c

    def with_drift(self, c: float) -> 'StableThreeHalves':
        return dataclasses.replace(self, c=c)

    def to_dict(self) -> Dict[str, Any]:
        return {"model": "stable", "c": self.c}


LevyModel = Union[CramerLundbergExp, BrownianRisk, JumpDiffusionPhaseType, StableThreeHalves]


@dataclass(frozen=True)
class RefractedModel:
    """
    A Levy model X refracted at level 0 with rate delta.

    Attributes:
        x_model (LevyModel): The process followed below 0.
        delta (float): Refraction rate; above 0 the drift is c - delta.
    """
    x_model: LevyModel
    delta: float = 0.0

    def __post_init__(self) -> None:
        _check_finite("delta", self.delta)
        if self.delta < 0:
            raise ValidationError("'delta' must be nonnegative", "delta", self.delta)

        # Y = X - delta t must stay in the model family; the stable family needs a positive drift.
        needs_drift_constraint = self.x_model.has_bounded_variation or self.x_model.kind == ModelKind.STABLE
        if needs_drift_constraint and self.delta >= self.x_model.c:
            raise ValidationError(
                f"drift constraint violated: delta ({self.delta}) must be smaller than c ({self.x_model.c})",
                "delta",
                self.delta
            )

    @property
    def y_model(self) -> LevyModel:
        """The model of Y = X - delta t."""
        if self.delta == 0:
            return self.x_model

        return self.x_model.with_drift(self.x_model.c - self.delta)

    def to_dict(self) -> Dict[str, Any]:
        result = self.x_model.to_dict()
        result["delta"] = self.delta
        return result


def laplace_exponent(model: LevyModel, lam: float) -> float:
    """
    Evaluate psi(lambda) = log E[exp(lambda X_1)].

    Args:
        model: The Levy model.
        lam: A finite, nonnegative argument.

    Returns:
        The Laplace exponent; exactly 0 at lambda = 0.

    Raises:
        ValidationError: If lambda is negative or not finite.
    """
    lam = _check_lambda(lam)
    if lam == 0:
        return 0.0

    return float(model.laplace_exponent(lam))


def laplace_exponent_derivative(model: LevyModel, lam: float) -> float:
    """Evaluate psi'(lambda) analytically (lambda > 0 for the stable model)."""
    return float(model.laplace_exponent_derivative(_check_lambda(lam)))


def mean_at_one(model: LevyModel) -> float:
    """Return E[X_1] = psi'(0+)."""
    return float(model.mean_at_one())


def net_profit_margin(rm: RefractedModel) -> float:
    """Return E[X_1] - delta, the drift of Y."""
    return mean_at_one(rm.x_model) - rm.delta


def _right_inverse(psi: Callable[[float], float], dpsi: Callable[[float], float], slope_at_zero: float,
                   q: float) -> float:
    """
    Largest root of psi(lambda) = q for a convex psi with psi(0) = 0.
    """
    if not math.isfinite(q) or q < 0:
        raise ValidationError("discount rate must be finite and nonnegative", "q", q)

    lower = 0.0
    if slope_at_zero < 0:
        # psi dips below zero first; start from its minimiser.
        upper = 1.0
        doublings = 0
        while dpsi(upper) <= 0:
            upper *= 2.0
            doublings += 1
            if doublings > 200:
                raise NumericError("failed to bracket the minimum of the Laplace exponent", {"q": q})

        lower = brentq(dpsi, 0.0, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    elif q == 0:
        return 0.0

    upper = max(2.0 * lower, 1.0)
    doublings = 0
    while psi(upper) <= q:
        upper *= 2.0
        doublings += 1
        if doublings > 200:
            raise NumericError("failed to bracket the right-inverse", {"q": q, "upper": upper})

    root = brentq(lambda lam: psi(lam) - q, lower, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    # One Newton polish step with the analytic derivative.
    slope = dpsi(root)
    if slope > 0:
        polished = root - (psi(root) - q) / slope
        if lower <= polished <= upper and abs(psi(polished) - q) <= abs(psi(root) - q):
            root = polished

    residual = abs(psi(root) - q)
    if residual > 1e-12 * max(1.0, q):
        raise NumericError("right-inverse did not reach tolerance", {"q": q, "root": root, "residual": residual})

    logger.debug("right-inverse at q=%g is %.17g (residual %.3g)", q, root, residual)
    return float(root)


def phi_inverse(model: LevyModel, q: float) -> float:
    """
    Return Phi(q) = sup{lambda >= 0 : psi(lambda) = q}.

    Args:
        model: The Levy model.
        q: Nonnegative discount rate.

    Returns:
        The right-inverse of the Laplace exponent.

    Raises:
        ValidationError: If q is negative.
        NumericError: If the root cannot be bracketed.
    """
    return _right_inverse(
        lambda lam: laplace_exponent(model, lam),
        lambda lam: laplace_exponent_derivative(model, lam),
        mean_at_one(model),
        q
    )


def varphi_inverse(rm: RefractedModel, q: float) -> float:
    """Return varphi(q), the right-inverse of psi(lambda) - delta lambda."""
    return _right_inverse(
        lambda lam: laplace_exponent(rm.x_model, lam) - rm.delta * lam,
        lambda lam: laplace_exponent_derivative(rm.x_model, lam) - rm.delta,
        net_profit_margin(rm),
        q
    )
