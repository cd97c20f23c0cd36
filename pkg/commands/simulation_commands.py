"""
Simulation Commands - pulse-train trajectories and basin scans
"""

import click
from flask import Blueprint

from commands.options import analysis_command
from services.errors import TrajectoryTooShortError
from services.fixed_point_service import find_fixed_points
from services.simulation_service import basin_scan, detect_attractor, simulate

simulation_bp = Blueprint('simulation', __name__, cli_group=None)


@simulation_bp.cli.command('simulate')
@analysis_command
def simulate_command(run):
    """
    Integrate the configured drive from simulation.x0 (trajectory.csv).
    Fixed points of the averaged dynamics are appended as trailing comments.
    """
    cfg = run.cfg
    trajectory = simulate(cfg.model, cfg.drive, cfg.simulation.x0, cfg.simulation.n_periods, cfg.integrator)
    points = find_fixed_points(cfg.model, cfg.drive, cfg.scan)
    comments = [('boundary_hit', trajectory.boundary_hit.value)]

    try:
        estimate = detect_attractor(trajectory, cfg.simulation.tail_fraction)
    except TrajectoryTooShortError:
        estimate = None
    if estimate is not None:
        comments += [('attractor_mean', estimate.mean), ('attractor_amplitude', estimate.amplitude)]

    path = run.write_csv('trajectory.csv', ('t_seconds', 'x'), trajectory.rows(), comments=comments,
                         trailer=[('fixed_point', fp.x) for fp in points])
    run.emit_plot('simulate', {'trajectory': path})
    if estimate is None:
        click.echo(f"{trajectory.n_periods} period(s) simulated, too few for an attractor estimate -> {path}")
    else:
        click.echo(f"Tail mean x={estimate.mean:.6f}, amplitude {estimate.amplitude:.3e} -> {path}")


@simulation_bp.cli.command('basin-scan')
@analysis_command
def basin_scan_command(run):
    """Attractor reached from each initial state of the basin grid (basin_scan.csv)."""
    cfg = run.cfg
    states = cfg.simulation.basin_states()
    estimates = basin_scan(cfg.model, cfg.drive, states, cfg.simulation.n_periods, cfg.integrator,
                           workers=run.workers, tail_fraction=cfg.simulation.tail_fraction)
    points = find_fixed_points(cfg.model, cfg.drive, cfg.scan)
    path = run.write_csv('basin_scan.csv', ('x0', 'mean', 'amplitude'),
                         [(x0, e.mean, e.amplitude) for x0, e in zip(states, estimates)],
                         trailer=[('fixed_point', fp.x) for fp in points])
    run.emit_plot('basin_scan', {'basin_scan': path})
    click.echo(f"{len(estimates)} initial states -> {path}")
