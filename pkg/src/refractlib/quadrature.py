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

"""Adaptive Gauss-Kronrod quadrature with uniform tolerances."""

import logging
from typing import Callable, Iterable, Optional

from scipy.integrate import quad

from .refract_errors import NumericError

logger = logging.getLogger(__name__)

EPSABS = 1e-11
EPSREL = 1e-9
MAX_SUBDIVISIONS = 60


def integrate(func: Callable[[float], float], lower: float, upper: float, points: Optional[Iterable[float]] = None,
              epsabs: float = EPSABS, epsrel: float = EPSREL) -> float:
    """
    Integrate a scalar function over [lower, upper].

    Args:
        func: Integrand.
        lower: Lower limit.
        upper: Upper limit (finite).
        points: Interior break points such as kinks or jumps of the integrand.
        epsabs: Absolute tolerance.
        epsrel: Relative tolerance.

    Returns:
        The integral.

    Raises:
        NumericError: If the adaptive scheme fails to converge.
    """
    if upper <= lower:
        return 0.0

    breaks = None
    if points is not None:
        breaks = sorted({float(p) for p in points if lower < p < upper})
        if not breaks:
            breaks = None

    result = quad(
        func, lower, upper, points=breaks, epsabs=epsabs, epsrel=epsrel, limit=MAX_SUBDIVISIONS, full_output=1
    )
    value, error = result[0], result[1]
    if len(result) > 3:
        info = result[2]
        raise NumericError(
            f"quadrature did not converge: {result[3]}",
            {
                "lower": lower,
                "upper": upper,
                "value": value,
                "error_estimate": error,
                "subdivisions": float(info.get("last", 0)),
                "evaluations": float(info.get("neval", 0)),
            }
        )

    logger.debug("quadrature on [%g, %g]: %.17g (error estimate %.3g)", lower, upper, value, error)
    return float(value)
