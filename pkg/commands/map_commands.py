"""
Map Commands - sign map of g and the N_st map over the pulse amplitudes
"""

import logging
from collections import Counter

import click
from flask import Blueprint

from commands.options import analysis_command
from services.bifurcation_service import nst_map, sign_map, trace_boundary

logger = logging.getLogger(__name__)

maps_bp = Blueprint('maps', __name__, cli_group=None)


def _grid_rows(grid):
    for i, row_value in enumerate(grid.row_axis):
        for j, v_minus in enumerate(grid.v_minus_axis):
            yield row_value, v_minus, int(grid.cells[i, j])


@maps_bp.cli.command('sign-map')
@analysis_command
def sign_map_command(run):
    """Sign of g over (x, V-) at the configured V+ (sign_map.csv)."""
    window = run.cfg.sign_map
    grid = sign_map(run.cfg.model, run.cfg.drive, window.v_plus,
                    (window.v_minus_lo, window.v_minus_hi), (window.x_lo, window.x_hi),
                    (window.n_x, window.n_v_minus), workers=run.workers)
    path = run.write_csv('sign_map.csv', ('x', 'v_minus', 'sign'), _grid_rows(grid))
    run.emit_plot('sign_map', {'sign_map': path})
    click.echo(f"Sign map at V+={window.v_plus:g} V: {grid.cells.size} cells -> {path}")


@maps_bp.cli.command('nst-map')
@analysis_command
def nst_map_command(run):
    """Number of stable fixed points over (V+, V-) (nst_map.csv, nst_boundary.csv)."""
    window = run.cfg.nst_map
    grid = nst_map(run.cfg.model, run.cfg.drive, (window.v_plus_lo, window.v_plus_hi),
                   (window.v_minus_lo, window.v_minus_hi), (window.n_v_plus, window.n_v_minus),
                   run.cfg.scan, workers=run.workers)
    path = run.write_csv('nst_map.csv', ('v_plus', 'v_minus', 'n_st'), _grid_rows(grid))

    boundary_rows = []
    for index, line in enumerate(trace_boundary(grid)):
        low, high = line.n_st_pair
        boundary_rows += [(index, low, high, v_plus, v_minus) for v_plus, v_minus in line.points]
    boundary = run.write_csv('nst_boundary.csv', ('polyline', 'n_low', 'n_high', 'v_plus', 'v_minus'),
                             boundary_rows)
    run.emit_plot('nst_map', {'nst_map': path})

    counts = Counter(int(n) for n in grid.cells.ravel())
    summary = ", ".join(f"N_st={n}: {counts[n]}" for n in sorted(counts))
    click.echo(f"N_st map: {summary} -> {path}, {boundary}")
