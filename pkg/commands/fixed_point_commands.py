"""
Fixed Point Commands - roots of g at the configured drive, and the g profile
"""

import click
from flask import Blueprint

from commands.options import analysis_command
from services.averaging_service import g_profile
from services.fixed_point_service import find_fixed_points

fixed_points_bp = Blueprint('fixed_points', __name__, cli_group=None)


@fixed_points_bp.cli.command('fixed-points')
@analysis_command
def fixed_points_command(run):
    """
    List the fixed points of g (fixed_points.csv) and print them as a table.
    A drive without fixed points is not an error.
    """
    points = find_fixed_points(run.cfg.model, run.cfg.drive, run.cfg.scan)
    rows = [(fp.x, fp.stability.value, fp.bracket[0], fp.bracket[1], fp.residual_log) for fp in points]
    path = run.write_csv('fixed_points.csv', ('x', 'stability', 'bracket_lo', 'bracket_hi', 'residual_log'), rows)
    run.emit_plot('fixed_points', {'fixed_points': path})

    click.echo(f"{'x':>10}  {'stability':<9}  {'residual':>10}")
    for fp in points:
        click.echo(f"{fp.x:10.6f}  {fp.stability.value:<9}  {fp.residual_log:10.2e}")
    click.echo(f"{len(points)} fixed point(s) -> {path}")


@fixed_points_bp.cli.command('g-profile')
@analysis_command
def g_profile_command(run):
    """Sign and log10|g| along the scan grid (g_profile.csv)."""
    profile = g_profile(run.cfg.model, run.cfg.drive, run.cfg.scan.grid())
    path = run.write_csv('g_profile.csv', ('x', 'sign', 'log10_abs_g'),
                         zip(profile.x, profile.sign, profile.log10_abs_g))
    run.emit_plot('g_profile', {'g_profile': path})
    click.echo(f"g profile with {len(profile.x)} samples -> {path}")
