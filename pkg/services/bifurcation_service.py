"""
Bifurcation Service Module - sweeps over the pulse amplitudes
Sign maps of g over (x, V-), N_st maps over (V+, V-), saddle-node thresholds
and the boundaries between regions of different N_st.
"""

import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from services.averaging_service import PulseDrive, g_sign
from services.errors import DomainError, InvalidBracketError
from services.fixed_point_service import ScanSpec, count_stable
from services.model_service import ModelParams

logger = logging.getLogger(__name__)

Range = Tuple[float, float]
Node = Tuple[int, int]


class PayloadKind(str, Enum):
    SIGN_MAP = "sign-map"
    NST_MAP = "nst-map"


class SaddleNodeKind(str, Enum):
    CREATION = "creation"
    ANNIHILATION = "annihilation"


@dataclass(frozen=True, eq=False)
class RegionGrid:
    """
    Rectangular grid with an integer payload per cell, rows first.
    Rows run over V+ for N_st maps and over x for sign maps; columns always run over V-.
    """
    row_axis: np.ndarray
    v_minus_axis: np.ndarray
    cells: np.ndarray
    payload_kind: PayloadKind

    def __post_init__(self):
        if self.cells.shape != (len(self.row_axis), len(self.v_minus_axis)):
            raise DomainError(
                f"Cells of shape {self.cells.shape} do not match axes "
                f"({len(self.row_axis)}, {len(self.v_minus_axis)})."
            )
        if self.payload_kind is PayloadKind.SIGN_MAP and not np.all(np.isin(self.cells, (-1, 0, 1))):
            raise DomainError("Sign-map payload must be -1, 0 or 1.")
        if self.payload_kind is PayloadKind.NST_MAP and np.any(self.cells < 0):
            raise DomainError("N_st payload must be non-negative.")


@dataclass(frozen=True, eq=False)
class BoundaryPolyline:
    """Ordered vertices (row value, V-) of a boundary between cells with N_st in n_st_pair."""
    points: np.ndarray
    n_st_pair: Tuple[int, int]


def sample_axis(bounds: Range, count: int) -> np.ndarray:
    """
    Uniform ascending samples. A degenerate range takes exactly one sample.
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
        raise DomainError(f"Axis range must be finite and ascending, got ({lo!r}, {hi!r}).")
    if lo == hi:
        if count != 1:
            raise DomainError(f"A degenerate axis at {lo!r} takes exactly one sample, got {count!r}.")
        return np.array([lo])
    if count < 2:
        raise DomainError(f"An axis over ({lo!r}, {hi!r}) needs at least 2 samples, got {count!r}.")
    return np.linspace(lo, hi, count)


def _map_rows(row_task: Callable[[float], np.ndarray], rows: np.ndarray, workers: int) -> np.ndarray:
    # rows share nothing mutable; map() keeps index order whatever the completion order
    if workers <= 1:
        results = [row_task(value) for value in rows]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(row_task, rows))
    return np.vstack(results).astype(int)


def sign_map(p: ModelParams, d_template: PulseDrive, v_plus: float, v_minus_range: Range,
             x_range: Range, resolution: Tuple[int, int], workers: int = 1) -> RegionGrid:
    """
    g_sign over (x, V-) at fixed V+.

    Args:
        resolution: (samples in x, samples in V-), each at least 2
    """
    n_x, n_v = resolution
    if n_x < 2 or n_v < 2:
        raise DomainError(f"A sign map needs at least 2 samples per axis, got {resolution!r}.")
    x_axis = sample_axis(x_range, n_x)
    v_axis = sample_axis(v_minus_range, n_v)
    if x_axis[0] == x_axis[-1] or v_axis[0] == v_axis[-1]:
        raise DomainError("A sign map window must have a non-zero area.")

    def column(v_minus: float) -> np.ndarray:
        return g_sign(p, d_template.with_amplitudes(v_plus, v_minus), x_axis)

    columns = _map_rows(column, v_axis, workers)
    logger.info("sign map at V+=%.4g: %d x %d cells", v_plus, n_x, n_v)
    return RegionGrid(row_axis=x_axis, v_minus_axis=v_axis, cells=columns.T.copy(),
                      payload_kind=PayloadKind.SIGN_MAP)


def nst_map(p: ModelParams, d_template: PulseDrive, v_plus_range: Range, v_minus_range: Range,
            resolution: Tuple[int, int], scan: ScanSpec = ScanSpec(), workers: int = 1) -> RegionGrid:
    """
    N_st over (V+, V-); every cell is solved independently.
    """
    v_plus_axis = sample_axis(v_plus_range, resolution[0])
    v_minus_axis = sample_axis(v_minus_range, resolution[1])

    def row(v_plus: float) -> np.ndarray:
        return np.array([count_stable(p, d_template.with_amplitudes(v_plus, v_minus), scan)
                         for v_minus in v_minus_axis])

    logger.info("N_st map: %d x %d cells on %d worker(s)", len(v_plus_axis), len(v_minus_axis), workers)
    cells = _map_rows(row, v_plus_axis, workers)
    return RegionGrid(row_axis=v_plus_axis, v_minus_axis=v_minus_axis, cells=cells,
                      payload_kind=PayloadKind.NST_MAP)


def _is_transition(which: SaddleNodeKind, n_lo: int, n_hi: int) -> bool:
    if which is SaddleNodeKind.CREATION:
        return n_hi > n_lo
    return n_hi < n_lo


def _locate_bracket(count: Callable[[float], int], which: SaddleNodeKind,
                    window: Range, points: int) -> Range:
    lattice = sample_axis(window, points)
    counts = [count(v) for v in lattice]
    for k in range(len(lattice) - 1):
        if _is_transition(which, counts[k], counts[k + 1]):
            return float(lattice[k]), float(lattice[k + 1])
    raise InvalidBracketError(f"No {which.value} transition of N_st found for V- in {window!r}.")


def saddle_node_threshold(p: ModelParams, d_template: PulseDrive, v_plus: float,
                          which: SaddleNodeKind, v_minus_bracket: Optional[Range] = None,
                          scan: ScanSpec = ScanSpec(), tol: float = 1e-4,
                          search_window: Range = (-1.0, -0.3), search_points: int = 71) -> float:
    """
    V- at which a stable/unstable pair is created or annihilated, at fixed V+.

    Bisects the integer N_st in V- until the bracket is no wider than tol.
    Creation means N_st grows as V- increases through the bracket, annihilation
    that it drops. Without a bracket the first such transition in search_window
    is used.

    Raises:
        InvalidBracketError: when the bracket ends have equal N_st, or the change
            has the wrong direction for `which`.
    """
    which = SaddleNodeKind(which)

    def count(v_minus: float) -> int:
        return count_stable(p, d_template.with_amplitudes(v_plus, v_minus), scan)

    if v_minus_bracket is None:
        v_minus_bracket = _locate_bracket(count, which, search_window, search_points)
    lo, hi = sorted(float(v) for v in v_minus_bracket)
    n_lo, n_hi = count(lo), count(hi)
    if n_lo == n_hi:
        raise InvalidBracketError(f"N_st is {n_lo} at both ends of V- bracket ({lo!r}, {hi!r}).")
    if not _is_transition(which, n_lo, n_hi):
        raise InvalidBracketError(
            f"N_st goes {n_lo} -> {n_hi} across ({lo!r}, {hi!r}); that is not a {which.value}."
        )

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if count(mid) == n_lo:
            lo = mid
        else:
            hi = mid
    threshold = 0.5 * (lo + hi)
    logger.info("%s threshold at V+=%.4g: V-=%.6f", which.value, v_plus, threshold)
    return threshold


def _cell_edges(axis: np.ndarray) -> np.ndarray:
    # face positions between samples, clipped to the axis range
    midpoints = 0.5 * (axis[1:] + axis[:-1])
    return np.concatenate(([axis[0]], midpoints, [axis[-1]]))


def _chain_segments(segments: Sequence[Tuple[Node, Node]]) -> List[List[Node]]:
    adjacency: Dict[Node, List[Tuple[Node, int]]] = defaultdict(list)
    for k, (a, b) in enumerate(segments):
        adjacency[a].append((b, k))
        adjacency[b].append((a, k))
    used = [False] * len(segments)

    def next_edge(node: Node):
        return next(((other, k) for other, k in adjacency[node] if not used[k]), None)

    # open ends first so that chains are not split in the middle
    starts = sorted(n for n in adjacency if len(adjacency[n]) % 2 == 1) + sorted(adjacency)
    chains = []
    for start in starts:
        while next_edge(start) is not None:
            chain, node = [start], start
            step = next_edge(node)
            while step is not None:
                node, k = step
                used[k] = True
                chain.append(node)
                step = next_edge(node)
            chains.append(chain)
    return chains


def trace_boundary(grid: RegionGrid) -> List[BoundaryPolyline]:
    """
    Polylines along the cell faces where N_st changes, one family per (low, high) pair.
    Vertices sit on the faces between neighbouring samples.
    """
    if grid.payload_kind is not PayloadKind.NST_MAP:
        raise DomainError("trace_boundary needs an N_st map.")
    cells = grid.cells
    rows, cols = cells.shape
    by_pair: Dict[Tuple[int, int], List[Tuple[Node, Node]]] = defaultdict(list)

    for i in range(rows):
        for j in range(cols):
            here = int(cells[i, j])
            if i + 1 < rows and cells[i + 1, j] != here:
                pair = tuple(sorted((here, int(cells[i + 1, j]))))
                by_pair[pair].append(((i + 1, j), (i + 1, j + 1)))
            if j + 1 < cols and cells[i, j + 1] != here:
                pair = tuple(sorted((here, int(cells[i, j + 1]))))
                by_pair[pair].append(((i, j + 1), (i + 1, j + 1)))

    row_edges = _cell_edges(grid.row_axis)
    col_edges = _cell_edges(grid.v_minus_axis)
    polylines = []
    for pair in sorted(by_pair):
        for chain in _chain_segments(by_pair[pair]):
            points = np.array([(row_edges[r], col_edges[c]) for r, c in chain])
            polylines.append(BoundaryPolyline(points=points, n_st_pair=pair))
    logger.debug("traced %d boundary polylines", len(polylines))
    return polylines


def boundary_distance(polylines: Sequence[BoundaryPolyline], points: np.ndarray) -> np.ndarray:
    """
    Euclidean distance in (V+, V-) from each point to the nearest traced segment.
    Infinite when there are no segments.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    starts = [line.points[:-1] for line in polylines if len(line.points) > 1]
    if not starts:
        return np.full(len(points), np.inf)
    a = np.vstack(starts)
    b = np.vstack([line.points[1:] for line in polylines if len(line.points) > 1])
    direction = b - a
    length2 = np.einsum("ij,ij->i", direction, direction)
    offset = points[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("nij,ij->ni", offset, direction) / np.where(length2 > 0, length2, 1.0), 0.0, 1.0)
    nearest = a[None, :, :] + t[:, :, None] * direction[None, :, :]
    return np.sqrt(np.min(np.sum((points[:, None, :] - nearest) ** 2, axis=2), axis=1))
