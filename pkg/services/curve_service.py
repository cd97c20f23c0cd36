"""
Curve Service Module - closed-form bifurcation curves
Curve A (parametric saddle-node locus) with its cusp, curve B (a stable point
leaving through x = 1) and the non-parametric branches C and D.

Every arcsinh of an exponential is evaluated from the logarithm of its argument,
so none of these curves overflow even where exp(gamma) is far out of range.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy import optimize

from services.averaging_service import PulseDrive, PulseTiming
from services.errors import CurveRangeError, DomainError
from services.model_service import LN2, ModelParams, log_sinh, memductance

logger = logging.getLogger(__name__)

# arcsinh(y) is ln(2y) to double precision beyond this argument
_ASINH_LOG_SWITCH = math.log(1e15)
CURVE_A_SAMPLES = 2000
CURVE_A_X_RANGE = (0.02, 0.95)
ITERATE_XTOL = 1e-10


class CurveAContext(NamedTuple):
    """Auxiliary quantities along curve A, one entry per emitted sample."""
    Gamma: np.ndarray
    gamma_tilde: np.ndarray
    gamma: np.ndarray


class CuspPoint(NamedTuple):
    x_c: float
    v_plus_c: float
    v_minus_c: float


class EquationSides(NamedTuple):
    x: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray


@dataclass(frozen=True, eq=False)
class BifurcationCurve:
    """
    Polyline in (V+, V-), ordered as the input samples.

    x holds the curve parameter for A, the tangency state for C and x_min for D.
    """
    name: str
    v_plus: np.ndarray
    v_minus: np.ndarray
    x: Optional[np.ndarray] = None
    context: Optional[CurveAContext] = None

    def __len__(self) -> int:
        return len(self.v_plus)


def _asinh_from_log(log_y: np.ndarray) -> np.ndarray:
    log_y = np.asarray(log_y, dtype=float)
    small = np.arcsinh(np.exp(np.minimum(log_y, _ASINH_LOG_SWITCH)))
    return np.where(log_y > _ASINH_LOG_SWITCH, log_y + LN2, small)


def _log_prefactor(p: ModelParams, timing: PulseTiming) -> float:
    # ln(B tau+ / (A tau-))
    return math.log(p.B) - math.log(p.A) + timing.log_width_ratio


def _low_state(p: ModelParams, v_plus: np.ndarray) -> np.ndarray:
    return p.a * np.exp(p.b * np.sqrt(v_plus))


def _v_minus_from_exponent(p: ModelParams, timing: PulseTiming, v_plus: np.ndarray,
                           exponent: np.ndarray) -> np.ndarray:
    """V- = -sigma_off asinh[(B tau+ / A tau-) sinh(V+/sigma_on) exp(exponent)]."""
    log_y = _log_prefactor(p, timing) + log_sinh(np.asarray(v_plus, dtype=float) / p.sigma_on) + exponent
    return -p.sigma_off * _asinh_from_log(log_y)


def _positive_samples(name: str, values, upper: Optional[float] = None) -> np.ndarray:
    values = np.atleast_1d(np.asarray(values, dtype=float))
    if values.ndim != 1 or values.size == 0:
        raise DomainError(f"{name} must be a non-empty vector.")
    if not np.all(np.isfinite(values) & (values > 0)):
        raise DomainError(f"{name} must be finite and positive.")
    if upper is not None and not np.all(values < upper):
        raise DomainError(f"{name} must lie below {upper!r}.")
    return values


def gamma(p: ModelParams, d: PulseDrive) -> float:
    """
    gamma = ln[A tau- sinh(|V-|/sigma_off) / (B tau+ sinh(V+/sigma_on))], summed in logs.
    """
    return float(math.log(p.A) - math.log(p.B) - d.timing.log_width_ratio
                 + log_sinh(-d.v_minus / p.sigma_off) - log_sinh(d.v_plus / p.sigma_on))


def _corrected_v_plus(p: ModelParams, v_zero: np.ndarray, iterate: bool) -> np.ndarray:
    one_step = v_zero * (1.0 + p.a / (2.0 * p.G_M) * np.exp(p.b * np.sqrt(v_zero)))
    if not iterate:
        return one_step

    def correction(v):
        return v_zero / np.sqrt(1.0 - p.a / p.G_M * np.exp(p.b * np.sqrt(v)))

    try:
        with np.errstate(invalid="ignore"):
            converged = np.asarray(optimize.fixed_point(correction, one_step, xtol=ITERATE_XTOL))
    except RuntimeError as exc:
        raise CurveRangeError(f"Iterated V+ correction does not converge: {exc}") from exc
    if not np.all(np.isfinite(converged)):
        raise CurveRangeError("Iterated V+ correction left the range where a exp(b sqrt(V+)) < G_M.")
    return converged


def curve_a(p: ModelParams, timing: PulseTiming, x_samples=None, iterate: bool = False) -> BifurcationCurve:
    """
    Curve A, parametrised by the fixed-point location x.

    V+ is the zero-order amplitude corrected once for the low-state conductance
    (or iterated to convergence with iterate=True); V- follows from the reduced
    fixed-point condition. Both branches appear as x passes the cusp.

    Args:
        p: model constants
        timing: pulse widths and period
        x_samples: states in (0, 1); defaults to 2000 log-spaced samples in [0.02, 0.95]

    Returns:
        BifurcationCurve named "A" carrying x and the per-sample CurveAContext.
    """
    if x_samples is None:
        x_samples = np.geomspace(*CURVE_A_X_RANGE, CURVE_A_SAMPLES)
    x = _positive_samples("x_samples", x_samples, upper=1.0)

    radicand = 2.0 * p.sigma_p / p.G_M * (p.x_off ** 2 / x ** 3 + x / p.x_on ** 2)
    if not np.all(radicand > 0):
        raise CurveRangeError("Curve A radicand is not positive.")
    v_plus = _corrected_v_plus(p, np.sqrt(radicand), iterate)

    conductance = p.G_M * x + _low_state(p, v_plus) * (1.0 - x)
    exponent = (p.x_off ** 2 / x ** 2 - x ** 2 / p.x_on ** 2
                + v_plus ** 2 * conductance / p.sigma_p)
    v_minus = _v_minus_from_exponent(p, timing, v_plus, exponent)

    context = CurveAContext(
        Gamma=2.0 * p.x_off ** 2 / x ** 3 + 2.0 * x / p.x_on ** 2,
        gamma_tilde=3.0 * p.x_off ** 2 / x ** 2 + x ** 2 / p.x_on ** 2,
        gamma=exponent,
    )
    logger.debug("curve A: %d samples, iterate=%s", len(x), iterate)
    return BifurcationCurve("A", v_plus, v_minus, x=x, context=context)


def cusp_state(p: ModelParams) -> float:
    """x_c = 3^(1/4) sqrt(x_on x_off)."""
    return 3.0 ** 0.25 * math.sqrt(p.x_on * p.x_off)


def cusp(p: ModelParams, timing: PulseTiming, iterate: bool = False) -> CuspPoint:
    x_c = cusp_state(p)
    point = curve_a(p, timing, [x_c], iterate=iterate)
    return CuspPoint(x_c=x_c, v_plus_c=float(point.v_plus[0]), v_minus_c=float(point.v_minus[0]))


def cusp_branch_slopes(p: ModelParams, timing: PulseTiming, h: float = 1e-3) -> Tuple[float, float]:
    """
    dV-/dV+ of curve A on either side of the cusp, as chords over
    [x_c + h, x_c + 2h] and [x_c - 2h, x_c - h]. Returns (above, below).
    """
    x_c = cusp_state(p)
    if not 0.0 < h < x_c / 2.0:
        raise DomainError(f"Chord offset h must lie in (0, x_c/2), got {h!r}.")
    samples = curve_a(p, timing, [x_c + h, x_c + 2.0 * h, x_c - 2.0 * h, x_c - h])
    dv_plus = np.diff(samples.v_plus)
    dv_minus = np.diff(samples.v_minus)
    return float(dv_minus[0] / dv_plus[0]), float(dv_minus[2] / dv_plus[2])


def curve_b(p: ModelParams, timing: PulseTiming, v_plus_samples) -> BifurcationCurve:
    """Curve B: the reduced condition at x = 1, without the x_off^2 term."""
    v_plus = _positive_samples("v_plus_samples", v_plus_samples)
    exponent = v_plus ** 2 * p.G_M / p.sigma_p - 1.0 / p.x_on ** 2
    return BifurcationCurve("B", v_plus, _v_minus_from_exponent(p, timing, v_plus, exponent))


def minimum_state(p: ModelParams, v_plus_samples) -> np.ndarray:
    """
    x_min where the left side of the reduced condition has its minimum.

    Raises:
        CurveRangeError: when G_M - a exp(b sqrt(V+)) is not positive.
    """
    v_plus = _positive_samples("v_plus_samples", v_plus_samples)
    net = p.G_M - _low_state(p, v_plus)
    if not np.all(net > 0):
        raise CurveRangeError(
            f"G_M - a exp(b sqrt(V+)) is not positive for V+ up to {float(np.max(v_plus)):.6g} V."
        )
    return np.cbrt(2.0 * p.x_off ** 2 * p.sigma_p / (v_plus ** 2 * net))


def curve_c(p: ModelParams, timing: PulseTiming, v_plus_samples) -> BifurcationCurve:
    """
    Curve C: zero discriminant of the reduced condition with x_off^2/x^2 dropped.
    Only drives with an interior minimum (x_min < 1) are emitted.
    """
    v_plus = _positive_samples("v_plus_samples", v_plus_samples)
    keep = minimum_state(p, v_plus) < 1.0
    v_plus = v_plus[keep]
    net = p.G_M - _low_state(p, v_plus)
    exponent = (v_plus ** 4 * p.x_on ** 2 * net ** 2 / (4.0 * p.sigma_p ** 2)
                + v_plus ** 2 * _low_state(p, v_plus) / p.sigma_p)
    tangency = p.x_on ** 2 * v_plus ** 2 * net / (2.0 * p.sigma_p)
    logger.debug("curve C: %d of %d samples emitted", len(v_plus), len(keep))
    return BifurcationCurve("C", v_plus, _v_minus_from_exponent(p, timing, v_plus, exponent), x=tangency)


def curve_d(p: ModelParams, timing: PulseTiming, v_plus_samples) -> BifurcationCurve:
    """
    Curve D: the two sides of the reduced condition touch at x_min.
    Only drives with x_min < 1 are emitted.
    """
    v_plus = _positive_samples("v_plus_samples", v_plus_samples)
    x_min = minimum_state(p, v_plus)
    keep = x_min < 1.0
    v_plus, x_min = v_plus[keep], x_min[keep]
    conductance = p.G_M * x_min + _low_state(p, v_plus) * (1.0 - x_min)
    exponent = (v_plus ** 2 * conductance / p.sigma_p + p.x_off ** 2 / x_min ** 2
                - x_min ** 2 / p.x_on ** 2)
    logger.debug("curve D: %d of %d samples emitted", len(v_plus), len(keep))
    return BifurcationCurve("D", v_plus, _v_minus_from_exponent(p, timing, v_plus, exponent), x=x_min)


def reduced_equation_sides(p: ModelParams, d: PulseDrive, x_samples) -> EquationSides:
    """
    Both sides of the reduced fixed-point condition along x:
    V+^2 G(x, V+)/sigma_p + x_off^2/x^2  versus  gamma + x^2/x_on^2.
    """
    x = _positive_samples("x_samples", x_samples)
    if not np.all(x <= 1.0):
        raise DomainError("x_samples must lie in (0, 1].")
    lhs = d.v_plus ** 2 * memductance(p, x, d.v_plus) / p.sigma_p + p.x_off ** 2 / x ** 2
    rhs = gamma(p, d) + x ** 2 / p.x_on ** 2
    return EquationSides(x, lhs, rhs)


def fixed_point_equation_sides(p: ModelParams, d: PulseDrive, x_samples) -> EquationSides:
    """
    The full condition, including 1/(1 + beta G(x, V-) V-^2) on the right.
    lhs - rhs equals averaging_service.log_balance.
    """
    reduced = reduced_equation_sides(p, d, x_samples)
    last = 1.0 / (1.0 + p.beta * memductance(p, reduced.x, d.v_minus) * d.v_minus ** 2)
    return EquationSides(reduced.x, reduced.lhs, reduced.rhs + last)
