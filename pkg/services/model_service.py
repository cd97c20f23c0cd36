"""
Model Service Module - TaO memristor constitutive relations
Memductance, current and the state evolution rate, in linear and log form.

All voltages are volts, conductances siemens, rates 1/s. The state x is
dimensionless and lives in [0, 1].
"""

import logging
import math
from dataclasses import dataclass, fields
from typing import NamedTuple, Union

import numpy as np

from services.errors import DomainError, RateOverflowError

logger = logging.getLogger(__name__)

State = Union[float, np.ndarray]

# ln(sinh(y)) switches to y - ln 2 above this argument
LOG_SINH_SWITCH = 30.0
LN2 = math.log(2.0)
# largest exponent whose exp() is still a finite double
LOG_FLOAT_MAX = float(np.log(np.finfo(np.float64).max))
# below this state the off-branch factor exp(-x_off^2/x^2) is an exact zero in doubles
_TINY_STATE = 1e-100


@dataclass(frozen=True)
class ModelParams:
    """
    The eleven constants of the TaO model. Defaults are the reference parameter set.
    """
    A: float = 1e-10
    B: float = 1e-4
    sigma_off: float = 0.013
    sigma_on: float = 0.45
    sigma_p: float = 4e-5
    x_off: float = 0.4
    x_on: float = 0.06
    beta: float = 500.0
    G_M: float = 0.025
    a: float = 7.2e-6
    b: float = 4.7

    def __post_init__(self):
        for field in fields(self):
            value = getattr(self, field.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise DomainError(f"Model parameter {field.name} must be a number, got {value!r}.")
            if not math.isfinite(value) or value <= 0:
                raise DomainError(f"Model parameter {field.name} must be finite and positive, got {value!r}.")


class SignedLogRate(NamedTuple):
    """Sign and natural log of |rate|. log_magnitude is nan when sign is 0."""
    sign: int
    log_magnitude: float

    def to_linear(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.log_magnitude > LOG_FLOAT_MAX:
            raise RateOverflowError(
                f"|rate| = exp({self.log_magnitude:.6g}) exceeds the double range; compare in the log domain."
            )
        return self.sign * math.exp(self.log_magnitude)


def log_sinh(y: State) -> State:
    """ln(sinh(y)) for y > 0, using y - ln 2 above LOG_SINH_SWITCH."""
    if np.ndim(y) == 0:
        y = float(y)
        return y - LN2 if y > LOG_SINH_SWITCH else math.log(math.sinh(y))
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(y > LOG_SINH_SWITCH, y - LN2, np.log(np.sinh(np.minimum(y, LOG_SINH_SWITCH))))


def _check_state(x: State) -> State:
    if np.ndim(x) == 0:
        x = float(x)
        if not 0.0 <= x <= 1.0:
            raise DomainError(f"State x must lie in [0, 1], got {x!r}.")
        return x
    x = np.asarray(x, dtype=float)
    if not np.all((x >= 0.0) & (x <= 1.0)):
        raise DomainError("State x must lie in [0, 1] for every sample.")
    return x


def _check_voltage(v: float) -> float:
    v = float(v)
    if not math.isfinite(v):
        raise DomainError(f"Voltage must be finite, got {v!r}.")
    return v


def _memductance(p: ModelParams, x: State, v: float) -> State:
    try:
        low_state = p.a * math.exp(p.b * math.sqrt(abs(v)))
    except OverflowError as exc:
        raise RateOverflowError(f"exp(b*sqrt(|v|)) overflows at v={v!r}.") from exc
    return p.G_M * x + low_state * (1.0 - x)


def _log_magnitude(p: ModelParams, x: State, v: float) -> State:
    # unchecked ln|f(x, v)| for v != 0; arrays must not contain x == 0 on the off branch
    g = _memductance(p, x, v)
    if v > 0:
        return math.log(p.B) + log_sinh(v / p.sigma_on) - x * x / p.x_on ** 2 + g * v * v / p.sigma_p
    return (math.log(p.A) + log_sinh(-v / p.sigma_off) - (p.x_off / x) ** 2
            + 1.0 / (1.0 + p.beta * g * v * v))


def memductance(p: ModelParams, x: State, v: float) -> State:
    """
    G(x, v) = G_M x + a exp(b sqrt|v|) (1 - x).

    Args:
        p: model constants
        x: state in [0, 1], scalar or array
        v: voltage (V)

    Returns:
        Conductance in siemens, same shape as x.
    """
    return _memductance(p, _check_state(x), _check_voltage(v))


def current(p: ModelParams, x: State, v: float) -> State:
    """I = G(x, v) v."""
    v = _check_voltage(v)
    return memductance(p, x, v) * v


def log_evolution_rate(p: ModelParams, x: float, v: float) -> SignedLogRate:
    """
    Evolution rate dx/dt as (sign, ln|rate|), summed factor by factor so it never overflows.

    The rate is exactly zero at v == 0, and at x == 0 on the negative branch.
    """
    x = _check_state(x)
    v = _check_voltage(v)
    if np.ndim(x) != 0:
        raise DomainError("log_evolution_rate takes a scalar state; use log_rate_magnitude for arrays.")
    if v == 0.0:
        return SignedLogRate(0, math.nan)
    if v > 0:
        return SignedLogRate(1, _log_magnitude(p, x, v))
    if x < _TINY_STATE:
        return SignedLogRate(0, math.nan)
    return SignedLogRate(-1, _log_magnitude(p, x, v))


def evolution_rate(p: ModelParams, x: float, v: float) -> float:
    """
    Linear-domain evolution rate (1/s).

    Raises:
        RateOverflowError: when |rate| exceeds the double range.
    """
    return log_evolution_rate(p, x, v).to_linear()


def log_rate_magnitude(p: ModelParams, x: State, v: float) -> State:
    """ln|f(x, v)| for scalar or array x; -inf wherever the rate is exactly zero."""
    x = _check_state(x)
    v = _check_voltage(v)
    if v == 0.0:
        return -math.inf if np.ndim(x) == 0 else np.full(np.shape(x), -np.inf)
    if v > 0:
        return _log_magnitude(p, x, v)
    if np.ndim(x) == 0:
        return -math.inf if x < _TINY_STATE else _log_magnitude(p, x, v)
    safe = np.where(x < _TINY_STATE, 1.0, x)
    return np.where(x < _TINY_STATE, -np.inf, _log_magnitude(p, safe, v))
