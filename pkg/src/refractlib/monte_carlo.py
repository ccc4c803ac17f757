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
Monte Carlo oracle for the refracted surplus process.

Bounded-variation models (Cramer-Lundberg, phase-type without a Brownian part) are simulated
exactly, event by event: between claims the path is linear, so level crossings are solved
in closed form.  Models with a Brownian part use Euler steps.  No scale-function machinery
is used anywhere in this module.

Paths are split into fixed-size blocks; block b draws from its own Philox stream keyed by
(seed, b) and block sums are combined in block order, so estimates do not depend on the
number of worker processes.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .levy_model import (
    BrownianRisk, CramerLundbergExp, JumpDiffusionPhaseType, ModelKind, RefractedModel, net_profit_margin
)
from .parisian_ruin import ParisianQuery
from .refract_errors import UnsupportedOperationError, ValidationError

logger = logging.getLogger(__name__)

# Fraction of undecided paths at the horizon above which an estimate is flagged.
TRUNCATION_WARNING = 1e-3

DEFAULT_STEPS_PER_DELAY = 2000
MAX_STEP_FRACTION = 1.0 / 500.0

# Brownian paths above this many step standard deviations are moved by an exact passage time.
ACCELERATION_LEVEL = 10.0


class Functional(IntEnum):
    """
    Path functionals the simulator can estimate.
    """
    PARISIAN: int = 0
    DISCOUNTED_PARISIAN: int = 1
    EXIT_BEFORE_PARISIAN: int = 2
    FIRST_PASSAGE_UP: int = 3
    OVERSHOOT_EXP: int = 4
    FIRST_PASSAGE_WITHIN_R: int = 5
    EXCURSION_RECOVERY: int = 6
    DISCOUNTED_RECOVERY: int = 7


@dataclass(frozen=True)
class McConfig:
    """
    Simulation settings.

    Attributes:
        paths (int): Number of paths.
        seed (int): Seed of the block streams.
        horizon (Optional[float]): Time at which undecided paths stop; derived from the model when None.
        step (Optional[float]): Euler step for models with a Brownian part; r / 2000 when None.
        workers (int): Number of worker processes.
        block_size (int): Paths per block.
    """
    paths: int = 100_000
    seed: int = 0
    horizon: Optional[float] = None
    step: Optional[float] = None
    workers: int = 1
    block_size: int = 10_000

    def __post_init__(self) -> None:
        if self.paths < 1:
            raise ValidationError("'paths' must be at least 1", "paths", self.paths)

        if self.workers < 1:
            raise ValidationError("'workers' must be at least 1", "workers", self.workers)

        if self.block_size < 1:
            raise ValidationError("'block_size' must be at least 1", "block_size", self.block_size)

        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ValidationError("'seed' must be an unsigned 64-bit integer", "seed", self.seed)

        if self.horizon is not None and not self.horizon > 0:
            raise ValidationError("'horizon' must be strictly positive", "horizon", self.horizon)

        if self.step is not None and not self.step > 0:
            raise ValidationError("'step' must be strictly positive", "step", self.step)

    def resolved_horizon(self, rm: RefractedModel, r: float) -> float:
        if self.horizon is None:
            return max(50.0 * r, 100.0 / max(net_profit_margin(rm), 0.1))

        if self.horizon < 10.0 * r:
            raise ValidationError("'horizon' must be at least 10 r", "horizon", self.horizon)

        return self.horizon

    def resolved_step(self, r: float) -> float:
        if self.step is None:
            return r / DEFAULT_STEPS_PER_DELAY

        if self.step > r * MAX_STEP_FRACTION:
            raise ValidationError("'step' must not exceed r / 500", "step", self.step)

        return self.step

    def to_dict(self) -> Dict[str, Any]:
        return {
            "paths": self.paths,
            "seed": self.seed,
            "horizon": self.horizon,
            "step": self.step,
            "workers": self.workers,
            "block_size": self.block_size,
        }


@dataclass(frozen=True)
class McEstimate:
    """
    A Monte Carlo estimate.

    Attributes:
        value (float): Sample mean.
        stderr (float): Standard error of the mean.
        paths (int): Number of paths.
        horizon (float): Time at which undecided paths were stopped.
        seed (int): Seed of the block streams.
        truncated (int): Paths still undecided at the horizon.
        truncation_note (bool): True when any path hit the horizon.
    """
    value: float
    stderr: float
    paths: int
    horizon: float
    seed: int
    truncated: int = 0
    truncation_note: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "paths": self.paths,
            "horizon": self.horizon,
            "seed": self.seed,
            "truncated": self.truncated,
            "truncation_note": self.truncation_note,
        }


@dataclass(frozen=True)
class _Plan:
    """What to simulate and when a path stops."""
    x: float
    delay: float
    barrier: float
    horizon: float
    step: float
    stop_at_down: bool = False
    stop_at_recovery: bool = False


@dataclass
class PathOutcomes:
    """
    Per-path event times of one block; math.inf marks events that did not happen.

    Attributes:
        ruin_time (np.ndarray): Parisian ruin time.
        barrier_time (np.ndarray): First time at or above the barrier.
        down_time (np.ndarray): First time below 0.
        undershoot (np.ndarray): Position at down_time (nan when there was none).
        recover_time (np.ndarray): Length of the first excursion below 0 when it ended within the delay.
        truncated (np.ndarray): Path still undecided at the horizon.
    """
    ruin_time: np.ndarray
    barrier_time: np.ndarray
    down_time: np.ndarray
    undershoot: np.ndarray
    recover_time: np.ndarray
    truncated: np.ndarray

    @classmethod
    def empty(cls, n: int) -> 'PathOutcomes':
        return cls(
            ruin_time=np.full(n, math.inf),
            barrier_time=np.full(n, math.inf),
            down_time=np.full(n, math.inf),
            undershoot=np.full(n, math.nan),
            recover_time=np.full(n, math.inf),
            truncated=np.zeros(n, dtype=bool),
        )


ClaimSampler = Callable[[np.random.Generator, int], np.ndarray]


def _claim_sampler(model: Any) -> ClaimSampler:
    if isinstance(model, CramerLundbergExp):
        scale = 1.0 / model.alpha
        return lambda rng, n: rng.exponential(scale, n)

    assert isinstance(model, JumpDiffusionPhaseType)
    generator = model.generator
    m = model.order
    leave_rates = -np.diag(generator)
    moves = generator / leave_rates[:, None]
    np.fill_diagonal(moves, 0.0)
    cumulative = np.cumsum(np.hstack([moves, (model.exit_vector / leave_rates)[:, None]]), axis=1)
    initial = model.initial

    def sample(rng: np.random.Generator, n: int) -> np.ndarray:
        total = np.zeros(n)
        if n == 0:
            return total

        state = rng.choice(m, size=n, p=initial)
        active = np.arange(n)
        while active.size:
            current = state[active]
            total[active] += rng.exponential(1.0 / leave_rates[current])
            uniforms = rng.random(active.size)
            following = (uniforms[:, None] > cumulative[current]).sum(axis=1)
            following = np.minimum(following, m)
            absorbed = following == m
            state[active[~absorbed]] = following[~absorbed]
            active = active[~absorbed]

        return total

    return sample


def _start(plan: _Plan, n: int) -> Tuple[PathOutcomes, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    out = PathOutcomes.empty(n)
    t = np.zeros(n)
    u = np.full(n, plan.x)
    excursion = np.full(n, math.nan)
    alive = np.ones(n, dtype=bool)
    if plan.x >= plan.barrier:
        out.barrier_time[:] = 0.0
        alive[:] = False
        return out, t, u, excursion, alive

    if plan.x < 0:
        excursion[:] = 0.0
        out.down_time[:] = 0.0
        out.undershoot[:] = plan.x
        if plan.stop_at_down:
            alive[:] = False

    return out, t, u, excursion, alive


def _record_down(out: PathOutcomes, plan: _Plan, alive: np.ndarray, excursion: np.ndarray, paths: np.ndarray,
                 times: np.ndarray, positions: np.ndarray) -> None:
    first = np.isinf(out.down_time[paths])
    out.down_time[paths[first]] = times[first]
    out.undershoot[paths[first]] = positions[first]
    excursion[paths] = times
    if plan.stop_at_down:
        alive[paths] = False


def _record_recovery(out: PathOutcomes, plan: _Plan, alive: np.ndarray, excursion: np.ndarray, paths: np.ndarray,
                     times: np.ndarray) -> None:
    first = np.isinf(out.recover_time[paths])
    out.recover_time[paths[first]] = times[first] - out.down_time[paths[first]]
    excursion[paths] = math.nan
    if plan.barrier <= 0:
        out.barrier_time[paths] = times
        alive[paths] = False

    if plan.stop_at_recovery:
        alive[paths] = False


def _simulate_jumps(rm: RefractedModel, plan: _Plan, n: int, rng: np.random.Generator) -> PathOutcomes:
    """
    Exact event-driven simulation of a bounded-variation refracted path.
    """
    model = rm.x_model
    drift_below = model.c
    drift_above = model.c - rm.delta
    mean_gap = 1.0 / model.eta
    claims = _claim_sampler(model)
    out, t, u, excursion, alive = _start(plan, n)

    while alive.any():
        paths = np.flatnonzero(alive)
        # Inter-arrival times are memoryless, so they are redrawn after every event.
        gaps = rng.exponential(mean_gap, paths.size)
        above = u[paths] >= 0

        up = paths[above]
        up_gaps = gaps[above]
        to_barrier = (plan.barrier - u[up]) / drift_above
        hits = to_barrier <= up_gaps
        up_step = np.where(hits, to_barrier, up_gaps)

        down = paths[~above]
        down_gaps = gaps[~above]
        to_zero = -u[down] / drift_below
        to_deadline = excursion[down] + plan.delay - t[down]
        ruins = to_deadline <= np.minimum(to_zero, down_gaps)
        recovers = ~ruins & (to_zero <= down_gaps)
        down_step = np.where(ruins, to_deadline, np.where(recovers, to_zero, down_gaps))

        up_late = t[up] + up_step > plan.horizon
        down_late = t[down] + down_step > plan.horizon
        up_jumps = ~hits & ~up_late
        down_jumps = ~ruins & ~recovers & ~down_late
        sizes = claims(rng, int(up_jumps.sum() + down_jumps.sum()))
        up_sizes = sizes[:int(up_jumps.sum())]
        down_sizes = sizes[int(up_jumps.sum()):]

        late = np.concatenate([up[up_late], down[down_late]])
        out.truncated[late] = True
        alive[late] = False

        barrier_paths = up[hits & ~up_late]
        t[barrier_paths] += to_barrier[hits & ~up_late]
        u[barrier_paths] = plan.barrier
        out.barrier_time[barrier_paths] = t[barrier_paths]
        alive[barrier_paths] = False

        jumpers = up[up_jumps]
        t[jumpers] += up_gaps[up_jumps]
        u[jumpers] += drift_above * up_gaps[up_jumps] - up_sizes
        crossed = u[jumpers] < 0
        _record_down(out, plan, alive, excursion, jumpers[crossed], t[jumpers[crossed]], u[jumpers[crossed]])

        ruined = down[ruins & ~down_late]
        out.ruin_time[ruined] = excursion[ruined] + plan.delay
        alive[ruined] = False

        recovered = down[recovers & ~down_late]
        t[recovered] += to_zero[recovers & ~down_late]
        u[recovered] = 0.0
        _record_recovery(out, plan, alive, excursion, recovered, t[recovered])

        sinkers = down[down_jumps]
        t[sinkers] += down_gaps[down_jumps]
        u[sinkers] += drift_below * down_gaps[down_jumps] - down_sizes

    return out


def _simulate_diffusion(rm: RefractedModel, plan: _Plan, n: int, rng: np.random.Generator) -> PathOutcomes:
    """
    Euler simulation of a refracted path with a Brownian part; crossings are detected by sign changes.
    """
    model = rm.x_model
    drift_below = model.c
    drift_above = model.c - rm.delta
    sigma = model.sigma
    dt = plan.step
    noise = sigma * math.sqrt(dt)
    jumps = isinstance(model, JumpDiffusionPhaseType)
    claims = _claim_sampler(model) if jumps else None
    claim_rate = model.eta * dt if jumps else 0.0
    accelerate = isinstance(model, BrownianRisk) and math.isinf(plan.barrier) and drift_above > 0
    level = ACCELERATION_LEVEL * noise
    out, t, u, excursion, alive = _start(plan, n)

    while alive.any():
        if accelerate:
            far = np.flatnonzero(alive & (u > 2.0 * level))
            if far.size:
                distance = u[far] - level
                returns = rng.random(far.size) < np.exp(-2.0 * drift_above * distance / sigma ** 2)
                passage = rng.wald(distance / drift_above, distance ** 2 / sigma ** 2)
                alive[far[~returns]] = False
                back = far[returns]
                arrival = t[back] + passage[returns]
                late = arrival > plan.horizon
                out.truncated[back[late]] = True
                alive[back[late]] = False
                t[back[~late]] = arrival[~late]
                u[back[~late]] = level

        paths = np.flatnonzero(alive)
        if paths.size == 0:
            break

        late = t[paths] + dt > plan.horizon
        out.truncated[paths[late]] = True
        alive[paths[late]] = False
        paths = paths[~late]
        if paths.size == 0:
            break

        before = u[paths]
        was_above = before >= 0
        after = before + np.where(was_above, drift_above, drift_below) * dt + noise * rng.standard_normal(paths.size)
        if jumps:
            counts = rng.poisson(claim_rate, paths.size)
            sizes = claims(rng, int(counts.sum()))
            after -= np.bincount(np.repeat(np.arange(paths.size), counts), weights=sizes, minlength=paths.size)

        now = t[paths] + dt
        t[paths] = now
        u[paths] = after
        is_above = after >= 0

        hits = after >= plan.barrier
        out.barrier_time[paths[hits]] = now[hits]
        alive[paths[hits]] = False

        crossed = was_above & ~is_above
        _record_down(out, plan, alive, excursion, paths[crossed], now[crossed], after[crossed])

        returned = ~was_above & is_above & ~hits
        _record_recovery(out, plan, alive, excursion, paths[returned], now[returned])

        still = ~is_above & alive[paths]
        overdue = still & (now - excursion[paths] >= plan.delay)
        ruined = paths[overdue]
        out.ruin_time[ruined] = excursion[ruined] + plan.delay
        alive[ruined] = False

    return out


def simulate_paths(rm: RefractedModel, plan: _Plan, n: int, rng: np.random.Generator) -> PathOutcomes:
    model = rm.x_model
    if model.kind == ModelKind.STABLE:
        raise UnsupportedOperationError("stable paths cannot be simulated", type(model).__name__, "simulate")

    if model.has_bounded_variation:
        return _simulate_jumps(rm, plan, n, rng)

    return _simulate_diffusion(rm, plan, n, rng)


@dataclass(frozen=True)
class _BlockTask:
    rm: RefractedModel
    plan: _Plan
    functional: Functional
    q: float
    theta: float
    delay: float
    seed: int
    block: int
    paths: int


@dataclass(frozen=True)
class _BlockSums:
    total: float
    squares: float
    paths: int
    truncated: int


def _functional_values(task: _BlockTask, out: PathOutcomes) -> np.ndarray:
    q = task.q
    functional = task.functional
    # 0 * inf never appears: every discount below is taken under an indicator on a finite time.
    if functional == Functional.PARISIAN:
        return np.isfinite(out.ruin_time).astype(float)

    if functional == Functional.DISCOUNTED_PARISIAN:
        finite = np.isfinite(out.ruin_time)
        values = np.zeros(out.ruin_time.size)
        values[finite] = np.exp(-q * (out.ruin_time[finite] - task.delay))
        return values

    if functional in (Functional.EXIT_BEFORE_PARISIAN, Functional.FIRST_PASSAGE_UP):
        finite = np.isfinite(out.barrier_time)
        values = np.zeros(out.barrier_time.size)
        values[finite] = np.exp(-q * out.barrier_time[finite])
        return values

    if functional == Functional.OVERSHOOT_EXP:
        finite = np.isfinite(out.down_time)
        values = np.zeros(out.down_time.size)
        values[finite] = np.exp(task.theta * out.undershoot[finite])
        return values

    if functional == Functional.FIRST_PASSAGE_WITHIN_R:
        return np.isfinite(out.barrier_time).astype(float)

    recovered = np.isfinite(out.recover_time) & (out.down_time < out.barrier_time)
    values = np.zeros(out.down_time.size)
    if functional == Functional.EXCURSION_RECOVERY:
        values[recovered] = np.exp(-q * out.down_time[recovered])

    else:
        values[recovered] = np.exp(-q * (out.down_time[recovered] + out.recover_time[recovered]))

    return values


def _run_block(task: _BlockTask) -> _BlockSums:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([task.seed, task.block])))
    out = simulate_paths(task.rm, task.plan, task.paths, rng)
    values = _functional_values(task, out)
    logger.debug("block %d: %d paths, mean %.6g", task.block, task.paths, float(values.mean()))
    return _BlockSums(
        total=float(values.sum()),
        squares=float((values * values).sum()),
        paths=task.paths,
        truncated=int(out.truncated.sum()),
    )


def _plan_for(query: ParisianQuery, functional: Functional, cfg: McConfig,
              level: Optional[float]) -> Tuple[_Plan, float]:
    rm = query.rm
    x = query.x
    r = query.r
    horizon = cfg.resolved_horizon(rm, r)
    step = cfg.resolved_step(r)

    if functional in (Functional.PARISIAN, Functional.DISCOUNTED_PARISIAN):
        return _Plan(x, r, query.a, horizon, step), r

    if functional == Functional.EXIT_BEFORE_PARISIAN:
        if not query.has_barrier:
            raise ValidationError("exit before Parisian ruin needs a finite barrier 'a'", "a", query.a)

        return _Plan(x, r, query.a, horizon, step), r

    if functional == Functional.FIRST_PASSAGE_UP:
        if level is None or level < x or level < 0:
            raise ValidationError("first passage needs a level 'b' with b >= max(x, 0)", "b", level)

        return _Plan(x, math.inf, level, horizon, step), r

    if functional == Functional.OVERSHOOT_EXP:
        if x <= 0:
            raise ValidationError("overshoot needs a strictly positive initial surplus", "x", x)

        return _Plan(x, math.inf, math.inf, horizon, step, stop_at_down=True), r

    if functional == Functional.FIRST_PASSAGE_WITHIN_R:
        if x >= 0:
            raise ValidationError("first passage within r needs a negative initial surplus", "x", x)

        return _Plan(x, r, 0.0, horizon, step), r

    return _Plan(x, r, query.a, horizon, step, stop_at_recovery=True), r


def simulate_functional(query: ParisianQuery, functional: Functional, cfg: McConfig,
                        level: Optional[float] = None, theta: Optional[float] = None) -> McEstimate:
    """
    Estimate a path functional of the refracted process started at query.x.

    Args:
        query: Model, initial surplus, delay, discount rate and barrier.
        functional: Which expectation to estimate.
        cfg: Simulation settings.
        level: The level b for FIRST_PASSAGE_UP.
        theta: The exponent for OVERSHOOT_EXP.

    Returns:
        The estimate; identical for identical inputs whatever the worker count.

    Raises:
        ValidationError: If the functional's parameters are missing or invalid.
        UnsupportedOperationError: For the stable model.
    """
    if functional == Functional.OVERSHOOT_EXP and (theta is None or theta <= 0):
        raise ValidationError("overshoot needs a strictly positive 'theta'", "theta", theta)

    if query.rm.x_model.kind == ModelKind.STABLE:
        raise UnsupportedOperationError("stable paths cannot be simulated", "StableThreeHalves", "simulate")

    plan, delay = _plan_for(query, functional, cfg, level)
    tasks: List[_BlockTask] = []
    for block, start in enumerate(range(0, cfg.paths, cfg.block_size)):
        tasks.append(_BlockTask(
            rm=query.rm,
            plan=plan,
            functional=functional,
            q=query.q,
            theta=theta if theta is not None else 0.0,
            delay=delay,
            seed=cfg.seed,
            block=block,
            paths=min(cfg.block_size, cfg.paths - start),
        ))

    if cfg.workers == 1 or len(tasks) == 1:
        sums = [_run_block(task) for task in tasks]

    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
            sums = list(executor.map(_run_block, tasks))

    total = 0.0
    squares = 0.0
    truncated = 0
    for block_sums in sums:
        total += block_sums.total
        squares += block_sums.squares
        truncated += block_sums.truncated

    n = cfg.paths
    mean = total / n
    variance = max(squares / n - mean * mean, 0.0)
    if truncated > TRUNCATION_WARNING * n:
        logger.warning(
            "%d of %d paths were undecided at the horizon %g; estimate is flagged", truncated, n, plan.horizon
        )

    return McEstimate(
        value=mean,
        stderr=math.sqrt(variance / n),
        paths=n,
        horizon=plan.horizon,
        seed=cfg.seed,
        truncated=truncated,
        truncation_note=truncated > 0,
    )


def simulate_parisian(rm: RefractedModel, x: float, r: float, cfg: McConfig) -> McEstimate:
    """Estimate P_x(kappa_r < horizon) for the refracted process."""
    return simulate_functional(ParisianQuery(rm, x, r), Functional.PARISIAN, cfg)
