"""
Simulation Service Module - pulse-train integration of the full model
Integrates dx/dt = f(x, v) pulse by pulse, records x at every pulse edge and
estimates the attractor a trajectory settles on.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy import integrate

from services.averaging_service import PulseDrive
from services.errors import DomainError, IntegrationError, RateOverflowError, TrajectoryTooShortError
from services.model_service import ModelParams, evolution_rate

logger = logging.getLogger(__name__)

# sub-steps are sized against max(x, STATE_FLOOR)
STATE_FLOOR = 0.01
# absolute disagreement below which a sub-step is always accepted
_ABSOLUTE_ERROR_FLOOR = 1e-15
MIN_ATTRACTOR_PERIODS = 10


class BoundaryHit(str, Enum):
    NONE = "none"
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class IntegratorSpec:
    max_rel_step: float = 0.01
    max_substeps_per_pulse: int = 10 ** 6

    def __post_init__(self):
        if isinstance(self.max_rel_step, bool) or not isinstance(self.max_rel_step, (int, float)) \
                or not 0.0 < self.max_rel_step <= 0.1:
            raise DomainError(f"max_rel_step must lie in (0, 0.1], got {self.max_rel_step!r}.")
        if isinstance(self.max_substeps_per_pulse, bool) or not isinstance(self.max_substeps_per_pulse, int) \
                or self.max_substeps_per_pulse < 1:
            raise DomainError(f"max_substeps_per_pulse must be a positive integer, got {self.max_substeps_per_pulse!r}.")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """x at every pulse edge, times ascending from 0."""
    times: np.ndarray
    states: np.ndarray
    drive: PulseDrive
    x0: float
    boundary_hit: BoundaryHit = BoundaryHit.NONE

    @property
    def n_periods(self) -> int:
        if len(self.times) == 0:
            return 0
        return int(round(self.times[-1] / self.drive.period))

    def rows(self) -> List[Tuple[float, float]]:
        return list(zip(self.times.tolist(), self.states.tolist()))


class AttractorEstimate(NamedTuple):
    mean: float
    amplitude: float


def _rate(p: ModelParams, x: float, v: float) -> float:
    return evolution_rate(p, min(max(x, 0.0), 1.0), v)


def integrate_pulse(p: ModelParams, x: float, v: float, width: float,
                    spec: IntegratorSpec = IntegratorSpec()) -> Tuple[float, BoundaryHit]:
    """
    Advance x through one pulse of constant voltage v.

    Explicit Euler with step doubling: every trial step is compared with two
    half steps, halved until they agree to max_rel_step of the increment, and
    the extrapolated value is kept. A single step never moves x by more than
    max_rel_step * max(x, 0.01).

    Returns:
        (new state, boundary flag); the state is clamped to [0, 1].

    Raises:
        IntegrationError: when the pulse needs more than max_substeps_per_pulse trial steps.
    """
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"State x must lie in [0, 1], got {x!r}.")
    if not (math.isfinite(width) and width >= 0):
        raise DomainError(f"Pulse width must be finite and non-negative, got {width!r}.")
    if v == 0.0 or width == 0.0:
        return x, BoundaryHit.NONE

    saturated = BoundaryHit.UPPER if v > 0 else BoundaryHit.LOWER
    elapsed, trials = 0.0, 0
    while width - elapsed > 0.0:
        try:
            rate = _rate(p, x, v)
        except RateOverflowError:
            return (1.0 if v > 0 else 0.0), saturated
        if rate == 0.0:
            break
        cap = spec.max_rel_step * max(x, STATE_FLOOR)
        dt = width - elapsed
        if abs(rate) * dt > cap:
            dt = cap / abs(rate)
        while True:
            trials += 1
            if trials > spec.max_substeps_per_pulse:
                raise IntegrationError(
                    f"Pulse at v={v!r} over {width!r} s needs more than {spec.max_substeps_per_pulse} sub-steps."
                )
            full = x + rate * dt
            half = min(max(x + 0.5 * rate * dt, 0.0), 1.0)
            try:
                two_halves = half + _rate(p, half, v) * 0.5 * dt
            except RateOverflowError:
                dt *= 0.5
                continue
            error = abs(two_halves - full)
            if error <= spec.max_rel_step * abs(two_halves - x) or error <= _ABSOLUTE_ERROR_FLOOR:
                break
            dt *= 0.5
        x = 2.0 * two_halves - full
        elapsed += dt
        if x >= 1.0:
            return 1.0, BoundaryHit.UPPER
        if x <= 0.0:
            return 0.0, BoundaryHit.LOWER
    return x, BoundaryHit.NONE


def negative_pulse_start(d: PulseDrive) -> float:
    """The negative pulse starts at T/2, moved so that it never overlaps the positive one or the period end."""
    return min(max(0.5 * d.period, d.tau_plus), d.period - d.tau_minus)


def simulate(p: ModelParams, d: PulseDrive, x0: float, n_periods: int,
             spec: IntegratorSpec = IntegratorSpec()) -> Trajectory:
    """
    Integrate n_periods of the pulse train from x0.

    Each period holds V+ from 0 to tau+, V- for tau- from negative_pulse_start,
    and zero voltage otherwise. A run with n_periods = 0 is empty.
    """
    x0 = float(x0)
    if not 0.0 < x0 < 1.0:
        raise DomainError(f"Initial state must lie in (0, 1), got {x0!r}.")
    if isinstance(n_periods, bool) or not isinstance(n_periods, int) or n_periods < 0:
        raise DomainError(f"n_periods must be a non-negative integer, got {n_periods!r}.")
    if n_periods == 0:
        return Trajectory(times=np.array([]), states=np.array([]), drive=d, x0=x0)

    neg_start = negative_pulse_start(d)
    neg_end = neg_start + d.tau_minus
    times, states = [0.0], [x0]
    first_hit = BoundaryHit.NONE

    def record(t: float, x: float):
        if t > times[-1]:
            times.append(t)
            states.append(x)
        else:
            states[-1] = x

    x = x0
    for k in range(n_periods):
        start = k * d.period
        x, hit = integrate_pulse(p, x, d.v_plus, d.tau_plus, spec)
        if first_hit is BoundaryHit.NONE and hit is not BoundaryHit.NONE:
            first_hit = hit
            logger.info("state saturated at the %s boundary in period %d", hit.value, k)
        record(start + d.tau_plus, x)
        record(start + neg_start, x)
        x, hit = integrate_pulse(p, x, d.v_minus, d.tau_minus, spec)
        if first_hit is BoundaryHit.NONE and hit is not BoundaryHit.NONE:
            first_hit = hit
            logger.info("state saturated at the %s boundary in period %d", hit.value, k)
        record(start + neg_end, x)
        record((k + 1) * d.period, x)

    logger.debug("simulated %d periods from x0=%.6g, end state %.6g", n_periods, x0, x)
    return Trajectory(times=np.array(times), states=np.array(states), drive=d, x0=x0,
                      boundary_hit=first_hit)


def detect_attractor(t: Trajectory, tail_fraction: float = 0.2) -> AttractorEstimate:
    """
    Time-weighted mean and peak-to-peak amplitude of x over the trailing
    fraction of the run.

    Raises:
        TrajectoryTooShortError: for fewer than 10 periods.
    """
    if not 0.0 < tail_fraction <= 1.0:
        raise DomainError(f"tail_fraction must lie in (0, 1], got {tail_fraction!r}.")
    if len(t.times) < 2 or t.n_periods < MIN_ATTRACTOR_PERIODS:
        raise TrajectoryTooShortError(
            f"Attractor detection needs at least {MIN_ATTRACTOR_PERIODS} periods."
        )
    end = t.times[-1]
    tail = t.times >= end * (1.0 - tail_fraction)
    times, states = t.times[tail], t.states[tail]
    if len(times) < 2:
        return AttractorEstimate(float(states[-1]), 0.0)
    mean = integrate.trapezoid(states, times) / (times[-1] - times[0])
    return AttractorEstimate(float(mean), float(np.max(states) - np.min(states)))


def basin_scan(p: ModelParams, d: PulseDrive, x0_values: Sequence[float], n_periods: int,
               spec: IntegratorSpec = IntegratorSpec(), workers: int = 1,
               tail_fraction: float = 0.2) -> List[AttractorEstimate]:
    """Attractor estimate per initial state, ordered as x0_values."""

    def settle(x0: float) -> AttractorEstimate:
        return detect_attractor(simulate(p, d, x0, n_periods, spec), tail_fraction)

    if workers <= 1:
        estimates = [settle(x0) for x0 in x0_values]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            estimates = list(pool.map(settle, x0_values))
    logger.info("basin scan: %d initial states over %d periods", len(estimates), n_periods)
    return estimates
