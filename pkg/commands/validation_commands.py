"""
Validation Commands - run the cross-check suite and report PASS/FAIL per check
"""

import click
from flask import Blueprint

from commands.options import EXIT_NUMERICAL, analysis_command
from services.validation_service import run_checks

validation_bp = Blueprint('validation', __name__, cli_group=None)


@validation_bp.cli.command('validate')
@click.option('--tolerance-scale', type=click.FloatRange(min=0.0, min_open=True), default=1.0, show_default=True,
              help='Multiply every tolerance by this factor.')
@analysis_command
def validate_command(run, tolerance_scale):
    """Cross-checks between the modules (validation.csv); exits 3 when any check fails."""
    results = run_checks(run.cfg, tolerance_scale, workers=run.workers)
    path = run.write_csv('validation.csv', ('check', 'measured', 'tolerance', 'passed'),
                         [(r.name, r.measured, r.tolerance, int(r.passed)) for r in results])
    run.emit_plot('validate', {'validation': path})

    click.echo(f"{'check':<24}  {'measured':>12}  {'tolerance':>12}  status")
    for r in results:
        click.echo(f"{r.name:<24}  {r.measured:12.4e}  {r.tolerance:12.4e}  {r.status}")
    failed = sum(1 for r in results if not r.passed)
    click.echo(f"{len(results) - failed} of {len(results)} checks passed -> {path}")
    if failed:
        click.get_current_context().exit(EXIT_NUMERICAL)
