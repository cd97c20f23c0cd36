"""
Validation Service Module - cross-checks between the analysis modules
Root residuals, averaging against the full dynamics, analytic curves against
the numeric N_st boundaries, the reference tangency and cusp values, and
overflow robustness of the sign evaluation.

The anchor checks compare against reference values and only hold for the default
model with tau+ = tau-.
"""

import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from services.averaging_service import PulseDrive, effective_g, g_sign, log_balance
from services.bifurcation_service import boundary_distance, nst_map, trace_boundary
from services.config_service import RunConfig
from services.curve_service import curve_a, curve_b, curve_c, curve_d, cusp
from services.errors import DomainError, RateOverflowError
from services.fixed_point_service import find_fixed_points
from services.model_service import ModelParams, log_rate_magnitude
from services.simulation_service import IntegratorSpec, integrate_pulse

logger = logging.getLogger(__name__)

GAP_WINDOW_V_PLUS = (0.45, 0.75)
GAP_WINDOW_V_MINUS = (-1.0, -0.3)
CURVE_A_RANGE = (0.45, 0.65)
# beyond V+ = 0.72 the 0|1 boundary follows curve D, not curve B
CURVE_B_RANGE = (0.55, 0.72)
TANGENCY_V_MINUS = -0.7
CURVE_C_TANGENCY = 0.5714
CURVE_D_TANGENCY = 0.6197
CUSP_STATE = 0.2039
CUSP_VOLTAGES = (0.49, -0.51)

# per-pulse excursions kept by the averaging check: large enough to resolve,
# small enough for first-order averaging
_EXCURSION_RANGE = (math.log(1e-9), math.log(1e-5))
_AVERAGING_WIDTH_FRACTION = 1e-3
_MAX_DRAWS = 200000


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float
    passed: bool

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"


def _result(name: str, measured: float, tolerance: float, scale: float) -> CheckResult:
    tolerance = tolerance * scale
    return CheckResult(name, float(measured), float(tolerance), bool(measured <= tolerance))


def fixed_point_residual(cfg: RunConfig) -> float:
    """Largest |L+ - L-| at the fixed points of the configured drive."""
    points = find_fixed_points(cfg.model, cfg.drive, cfg.scan)
    return max((point.residual_log for point in points), default=0.0)


def averaging_error(p: ModelParams, template: PulseDrive, samples: int, seed: int,
                    spec: IntegratorSpec = IntegratorSpec()) -> float:
    """
    Largest |dx/T - g(x)| / |g(x)| over seeded random drives and states with
    tau+ = tau- = 0.001 T, one full-model period each.
    """
    rng = np.random.default_rng(seed)
    width = _AVERAGING_WIDTH_FRACTION * template.period
    worst, accepted, draws = 0.0, 0, 0
    while accepted < samples:
        draws += 1
        if draws > _MAX_DRAWS:
            raise DomainError(f"Only {accepted} of {samples} averaging samples were usable.")
        v_plus, v_minus, x = rng.uniform(0.3, 0.8), rng.uniform(-1.0, -0.3), rng.uniform(0.05, 0.95)
        up = log_rate_magnitude(p, x, v_plus) + math.log(width)
        down = log_rate_magnitude(p, x, v_minus) + math.log(width)
        if not _EXCURSION_RANGE[0] <= max(up, down) <= _EXCURSION_RANGE[1]:
            continue
        if abs(up - down) < math.log(2.0):
            continue
        accepted += 1
        d = PulseDrive(v_plus, v_minus, width, width, template.period)
        after_up, _ = integrate_pulse(p, x, v_plus, width, spec)
        after, _ = integrate_pulse(p, after_up, v_minus, width, spec)
        g = float(effective_g(p, d, x))
        worst = max(worst, abs((after - x) / d.period - g) / abs(g))
    logger.debug("averaging check: %d of %d draws used", accepted, draws)
    return worst


def _window_samples(curve, v_plus_range) -> np.ndarray:
    inside = ((curve.v_plus >= v_plus_range[0]) & (curve.v_plus <= v_plus_range[1])
              & (curve.v_minus >= GAP_WINDOW_V_MINUS[0]) & (curve.v_minus <= GAP_WINDOW_V_MINUS[1]))
    return np.column_stack((curve.v_plus[inside], curve.v_minus[inside]))


def boundary_gaps(cfg: RunConfig, workers: int = 1):
    """Largest distance from curve A to the 1|2 boundary and from curve B to the 0|1 boundary."""
    n = cfg.validation.resolution
    timing = cfg.drive.timing
    grid = nst_map(cfg.model, cfg.drive, GAP_WINDOW_V_PLUS, GAP_WINDOW_V_MINUS, (n, n), cfg.scan, workers)
    polylines = trace_boundary(grid)
    upper = [line for line in polylines if line.n_st_pair == (1, 2)]
    lower = [line for line in polylines if line.n_st_pair == (0, 1)]

    a_points = _window_samples(curve_a(cfg.model, timing), CURVE_A_RANGE)
    b_points = _window_samples(curve_b(cfg.model, timing, np.linspace(*CURVE_B_RANGE, 201)), CURVE_B_RANGE)
    gap_a = float(np.max(boundary_distance(upper, a_points))) if len(a_points) else math.inf
    gap_b = float(np.max(boundary_distance(lower, b_points))) if len(b_points) else math.inf
    return gap_a, gap_b


def tangency_offsets(cfg: RunConfig):
    """|V- + 0.7| of curves C and D at their reference tangency drives."""
    timing = cfg.drive.timing
    c = curve_c(cfg.model, timing, [CURVE_C_TANGENCY])
    d = curve_d(cfg.model, timing, [CURVE_D_TANGENCY])
    offset_c = abs(float(c.v_minus[0]) - TANGENCY_V_MINUS) if len(c) else math.inf
    offset_d = abs(float(d.v_minus[0]) - TANGENCY_V_MINUS) if len(d) else math.inf
    return offset_c, offset_d


def overflow_failures(p: ModelParams, timing_drive: PulseDrive, points_per_axis: int = 22) -> int:
    """
    Lattice cells where g_sign misbehaves: a sign outside {-1, 0, 1}, or a
    finite linear g whose sign disagrees with g_sign.
    """
    failures = 0
    x = np.geomspace(1e-3, 1.0, points_per_axis)
    for v_plus in np.linspace(0.01, 1.0, points_per_axis):
        for v_minus in np.linspace(-1.0, -0.01, points_per_axis):
            d = timing_drive.with_amplitudes(v_plus, v_minus)
            signs = g_sign(p, d, x)
            failures += int(np.count_nonzero(~np.isin(signs, (-1, 0, 1))))
            if not np.all(np.isfinite(log_balance(p, d, x)) | (signs == 0)):
                failures += 1
            try:
                linear = effective_g(p, d, x)
            except RateOverflowError:
                continue
            finite = np.isfinite(linear) & (linear != 0)
            failures += int(np.count_nonzero(np.sign(linear[finite]) != signs[finite]))
    return failures


def run_checks(cfg: RunConfig, tolerance_scale: float = 1.0, workers: int = 1) -> List[CheckResult]:
    """
    Every cross-check, in a fixed order. Each tolerance is multiplied by tolerance_scale.
    """
    if not (math.isfinite(tolerance_scale) and tolerance_scale > 0):
        raise DomainError(f"tolerance_scale must be positive, got {tolerance_scale!r}.")
    settings = cfg.validation
    results = [_result("fixed_point_residual", fixed_point_residual(cfg), 1e-6, tolerance_scale)]
    results.append(_result("averaging_consistency",
                           averaging_error(cfg.model, cfg.drive, settings.samples, settings.seed, cfg.integrator),
                           0.05, tolerance_scale))

    gap_a, gap_b = boundary_gaps(cfg, workers)
    results.append(_result("curve_a_gap", gap_a, 0.03, tolerance_scale))
    results.append(_result("curve_b_gap", gap_b, 0.03, tolerance_scale))

    offset_c, offset_d = tangency_offsets(cfg)
    results.append(_result("curve_c_tangency", offset_c, 0.02, tolerance_scale))
    results.append(_result("curve_d_tangency", offset_d, 0.02, tolerance_scale))

    point = cusp(cfg.model, cfg.drive.timing)
    results.append(_result("cusp_state", abs(point.x_c - CUSP_STATE), 5e-4, tolerance_scale))
    results.append(_result("cusp_voltages", max(abs(point.v_plus_c - CUSP_VOLTAGES[0]),
                                                abs(point.v_minus_c - CUSP_VOLTAGES[1])),
                           0.01, tolerance_scale))

    results.append(_result("overflow_robustness", overflow_failures(cfg.model, cfg.drive), 0.0, tolerance_scale))
    failed = [r.name for r in results if not r.passed]
    logger.info("validation: %d checks, %d failed %s", len(results), len(failed), failed or "")
    return results
