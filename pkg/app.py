"""
Main Flask application entry point for the memristor bifurcation analysis.

This module provides the application factory pattern for creating Flask app instances.
Commands are organized in separate blueprint modules in the commands package and
run through the `cli` group: `python app.py nst-map --set drive.v_plus=0.6`.
"""

import logging

from flask import Flask
from flask.cli import FlaskGroup

import storage
from commands import register_blueprints

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def create_app(test_config=None):
    """
    Application factory function to create and configure Flask app.

    Runtime settings come from the defaults below, then from MEMBIF_* environment
    variables (MEMBIF_THREADS=4), then from test_config.

    Returns:
        Flask: Configured Flask application instance
    """
    app = Flask(__name__)
    app.config.from_mapping(
        THREADS=1,
        LOG_LEVEL="INFO",
        OUTPUT_PREFIX=storage.OUTPUT_PREFIX,
    )
    app.config.from_prefixed_env("MEMBIF")
    if test_config:
        app.config.update(test_config)

    level = logging.getLevelName(str(app.config["LOG_LEVEL"]).upper())
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)

    # Register all command blueprints
    register_blueprints(app)

    return app


cli = FlaskGroup(create_app=create_app, add_default_commands=False,
                 help="Bifurcation analysis of the pulse-driven TaO memristor.")


if __name__ == '__main__':
    cli()
