"""
Fixed Point Service Module - zeros of the averaged evolution function
Scans g on a grid in x, brackets every sign change, refines by bisection and
classifies each root by the direction of the sign change.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np

from services.averaging_service import PulseDrive, g_sign, log_balance
from services.errors import DomainError
from services.model_service import ModelParams

logger = logging.getLogger(__name__)


class Stability(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class ScanSpec:
    """Uniform x grid used to bracket roots, and the bisection width they are refined to."""
    x_lo: float = 1e-3
    x_hi: float = 1.0
    n_grid: int = 2001
    refine_tol: float = 1e-6

    def __post_init__(self):
        if not (0.0 < self.x_lo < self.x_hi <= 1.0):
            raise DomainError(f"Scan bounds must satisfy 0 < x_lo < x_hi <= 1, got ({self.x_lo!r}, {self.x_hi!r}).")
        if isinstance(self.n_grid, bool) or not isinstance(self.n_grid, int) or self.n_grid < 3:
            raise DomainError(f"n_grid must be an integer >= 3, got {self.n_grid!r}.")
        if not (math.isfinite(self.refine_tol) and self.refine_tol > 0):
            raise DomainError(f"refine_tol must be positive, got {self.refine_tol!r}.")

    def grid(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.n_grid)


@dataclass(frozen=True)
class FixedPoint:
    x: float
    stability: Stability
    bracket: Tuple[float, float]
    residual_log: float

    @property
    def is_stable(self) -> bool:
        return self.stability is Stability.STABLE


def sign_changes(signs: np.ndarray) -> List[Tuple[int, int]]:
    """
    Index pairs (i, j) of consecutive non-zero grid signs that differ.
    Grid points with an exact tie are stepped over.
    """
    nonzero = np.flatnonzero(signs != 0)
    if nonzero.size < 2:
        return []
    kept = signs[nonzero]
    flips = np.flatnonzero(kept[1:] != kept[:-1])
    return [(int(nonzero[k]), int(nonzero[k + 1])) for k in flips]


def _refine(p: ModelParams, d: PulseDrive, lo: float, hi: float, sign_lo: int, tol: float) -> Tuple[float, Tuple[float, float]]:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        sign_mid = g_sign(p, d, mid)
        if sign_mid == 0:
            return mid, (max(lo, mid - 0.25 * tol), min(hi, mid + 0.25 * tol))
        if sign_mid == sign_lo:
            lo = mid
        else:
            hi = mid

    # secant step on the smooth log balance inside the final bracket
    balance_lo = log_balance(p, d, lo)
    balance_hi = log_balance(p, d, hi)
    x = lo - balance_lo * (hi - lo) / (balance_hi - balance_lo)
    return min(max(x, lo), hi), (lo, hi)


def find_fixed_points(p: ModelParams, d: PulseDrive, s: ScanSpec = ScanSpec()) -> List[FixedPoint]:
    """
    All interior fixed points of g on the scan window, ascending in x.

    A + to - transition is a stable point, - to + an unstable one. The
    boundary x = 1 is never reported, and tangencies without a sign change
    are not seen.
    """
    grid = s.grid()
    signs = g_sign(p, d, grid)
    points: List[FixedPoint] = []
    for i, j in sign_changes(signs):
        sign_lo = int(signs[i])
        x, bracket = _refine(p, d, float(grid[i]), float(grid[j]), sign_lo, s.refine_tol)
        stability = Stability.STABLE if sign_lo > 0 else Stability.UNSTABLE
        points.append(FixedPoint(
            x=float(x),
            stability=stability,
            bracket=bracket,
            residual_log=float(abs(log_balance(p, d, x))),
        ))
    logger.debug("drive (%.6g, %.6g): %d fixed points", d.v_plus, d.v_minus, len(points))
    return points


def count_stable(p: ModelParams, d: PulseDrive, s: ScanSpec = ScanSpec()) -> int:
    """N_st: number of + to - transitions of g on the scan grid."""
    signs = g_sign(p, d, s.grid())
    return sum(1 for i, _ in sign_changes(signs) if signs[i] > 0)
