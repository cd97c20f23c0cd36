"""
Curve Commands - closed-form bifurcation curves and the reduced fixed-point equation
"""

import click
import numpy as np
from flask import Blueprint

from commands.options import analysis_command
from services.curve_service import (curve_a, curve_b, curve_c, curve_d, cusp,
                                    fixed_point_equation_sides, reduced_equation_sides)

curves_bp = Blueprint('curves', __name__, cli_group=None)


@curves_bp.cli.command('curves')
@analysis_command
def curves_command(run):
    """Curves A, B, C, D and the cusp (curve_a.csv ... cusp.csv)."""
    p, timing, sampling = run.cfg.model, run.cfg.drive.timing, run.cfg.curves
    x_samples = np.geomspace(sampling.x_lo, sampling.x_hi, sampling.n_x)
    v_plus_samples = np.linspace(sampling.v_plus_lo, sampling.v_plus_hi, sampling.n_v_plus)

    a = curve_a(p, timing, x_samples, iterate=sampling.iterate)
    b = curve_b(p, timing, v_plus_samples)
    c = curve_c(p, timing, v_plus_samples)
    d = curve_d(p, timing, v_plus_samples)
    point = cusp(p, timing, iterate=sampling.iterate)

    files = {
        'curve_a': run.write_csv('curve_a.csv', ('x', 'v_plus', 'v_minus', 'Gamma', 'gamma_tilde', 'gamma'),
                                 zip(a.x, a.v_plus, a.v_minus, *a.context)),
        'curve_b': run.write_csv('curve_b.csv', ('v_plus', 'v_minus'), zip(b.v_plus, b.v_minus)),
        'curve_c': run.write_csv('curve_c.csv', ('v_plus', 'v_minus', 'x'), zip(c.v_plus, c.v_minus, c.x)),
        'curve_d': run.write_csv('curve_d.csv', ('v_plus', 'v_minus', 'x_min'), zip(d.v_plus, d.v_minus, d.x)),
        'cusp': run.write_csv('cusp.csv', ('x_c', 'v_plus_c', 'v_minus_c'), [tuple(point)]),
    }
    run.emit_plot('curves', files)
    click.echo(f"Cusp at x_c={point.x_c:.4f}: V+={point.v_plus_c:.4f} V, V-={point.v_minus_c:.4f} V")
    click.echo(f"Curve samples: A {len(a)}, B {len(b)}, C {len(c)}, D {len(d)}")


@curves_bp.cli.command('reduced-profile')
@analysis_command
def reduced_profile_command(run):
    """Both sides of the fixed-point equation along x at the configured drive (reduced_profile.csv)."""
    x = run.cfg.scan.grid()
    reduced = reduced_equation_sides(run.cfg.model, run.cfg.drive, x)
    full = fixed_point_equation_sides(run.cfg.model, run.cfg.drive, x)
    path = run.write_csv('reduced_profile.csv', ('x', 'lhs', 'rhs', 'rhs_full'),
                         zip(reduced.x, reduced.lhs, reduced.rhs, full.rhs))
    run.emit_plot('reduced_profile', {'reduced_profile': path})
    click.echo(f"Reduced profile at V+={run.cfg.drive.v_plus:g} V, V-={run.cfg.drive.v_minus:g} V -> {path}")
