"""
Averaging Service Module - pulse-averaged evolution function
g(x, V+, V-) = (f(x, V+) tau+ + f(x, V-) tau-) / T and its overflow-safe sign.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from services.errors import DomainError, RateOverflowError
from services.model_service import LOG_FLOAT_MAX, ModelParams, State, log_rate_magnitude

logger = logging.getLogger(__name__)

# absolute tie tolerance when comparing the two log magnitudes
LOG_TIE_TOLERANCE = 1e-12
# relative slack when checking tau+ + tau- <= T
_PERIOD_SLACK = 1e-12


def _positive(name: str, value: float) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be a finite positive number, got {value!r}.")
    return float(value)


@dataclass(frozen=True)
class PulseTiming:
    """Pulse widths and period (s)."""
    tau_plus: float = 1e-10
    tau_minus: float = 1e-10
    period: float = 1e-9

    def __post_init__(self):
        _positive("tau_plus", self.tau_plus)
        _positive("tau_minus", self.tau_minus)
        _positive("period", self.period)
        if self.tau_plus + self.tau_minus > self.period * (1.0 + _PERIOD_SLACK):
            raise DomainError(
                f"Pulse widths {self.tau_plus!r} + {self.tau_minus!r} do not fit in the period {self.period!r}."
            )

    @property
    def log_width_ratio(self) -> float:
        """ln(tau+ / tau-)."""
        return math.log(self.tau_plus) - math.log(self.tau_minus)


@dataclass(frozen=True)
class PulseDrive:
    """
    Alternating pulse train: V+ for tau+, V- for tau-, repeated every period T.
    Defaults are the bistable drive with tau+ = tau- = 0.1 T, T = 1 ns.
    """
    v_plus: float = 0.54
    v_minus: float = -0.6
    tau_plus: float = 1e-10
    tau_minus: float = 1e-10
    period: float = 1e-9

    def __post_init__(self):
        _positive("v_plus", self.v_plus)
        if isinstance(self.v_minus, bool) or not isinstance(self.v_minus, (int, float)) \
                or not math.isfinite(self.v_minus) or self.v_minus >= 0:
            raise DomainError(f"v_minus must be a finite negative number, got {self.v_minus!r}.")
        PulseTiming(self.tau_plus, self.tau_minus, self.period)

    @property
    def timing(self) -> PulseTiming:
        return PulseTiming(self.tau_plus, self.tau_minus, self.period)

    def with_amplitudes(self, v_plus: float, v_minus: float) -> "PulseDrive":
        return replace(self, v_plus=float(v_plus), v_minus=float(v_minus))


class GProfile(NamedTuple):
    x: np.ndarray
    sign: np.ndarray
    log10_abs_g: np.ndarray


def _check_interior(x: State) -> State:
    if np.ndim(x) == 0:
        if not 0.0 < float(x) <= 1.0:
            raise DomainError(f"State x must lie in (0, 1], got {x!r}.")
        return float(x)
    x = np.asarray(x, dtype=float)
    if not np.all((x > 0.0) & (x <= 1.0)):
        raise DomainError("State x must lie in (0, 1] for every sample.")
    return x


def _weighted_logs(p: ModelParams, d: PulseDrive, x: State):
    x = _check_interior(x)
    up = log_rate_magnitude(p, x, d.v_plus) + math.log(d.tau_plus)
    down = log_rate_magnitude(p, x, d.v_minus) + math.log(d.tau_minus)
    return up, down


def log_balance(p: ModelParams, d: PulseDrive, x: State) -> State:
    """
    L+ - L- with L+ = ln(tau+ |f(x, V+)|) and L- = ln(tau- |f(x, V-)|).
    Positive where g > 0. Equal to the difference of the two sides of the full
    fixed-point condition.
    """
    up, down = _weighted_logs(p, d, x)
    return up - down


def g_sign(p: ModelParams, d: PulseDrive, x: State):
    """
    Sign of g at x (scalar -> int, array -> int array), computed by comparing
    log magnitudes so it never overflows.
    """
    balance = log_balance(p, d, x)
    signs = np.where(balance > LOG_TIE_TOLERANCE, 1, np.where(balance < -LOG_TIE_TOLERANCE, -1, 0))
    return int(signs) if np.ndim(signs) == 0 else signs.astype(int)


def effective_g(p: ModelParams, d: PulseDrive, x: State) -> State:
    """
    Linear-domain g (1/s).

    Raises:
        RateOverflowError: when a weighted rate over T exceeds the double range; use g_sign then.
    """
    up, down = _weighted_logs(p, d, x)
    if max(np.max(up), np.max(down)) - math.log(d.period) > LOG_FLOAT_MAX:
        raise RateOverflowError("Averaged rate exceeds the double range; compare with g_sign instead.")
    return (np.exp(up) - np.exp(down)) / d.period


def g_profile(p: ModelParams, d: PulseDrive, x_samples) -> GProfile:
    """
    Sign and log10|g| along x, evaluated without leaving the log domain.
    log10|g| is -inf at exact balance.
    """
    x = np.asarray(x_samples, dtype=float)
    up, down = _weighted_logs(p, d, x)
    high = np.maximum(up, down)
    gap = np.abs(up - down)
    with np.errstate(divide="ignore"):
        log_abs = high + np.log1p(-np.exp(-gap)) - math.log(d.period)
    return GProfile(x=x, sign=g_sign(p, d, x), log10_abs_g=log_abs / math.log(10.0))
