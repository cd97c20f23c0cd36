"""
Commands Package - Initialize all command blueprints
"""

from .map_commands import maps_bp
from .curve_commands import curves_bp
from .fixed_point_commands import fixed_points_bp
from .simulation_commands import simulation_bp
from .validation_commands import validation_bp

def register_blueprints(app):
    """Register all command blueprints with the Flask app."""
    app.register_blueprint(maps_bp)
    app.register_blueprint(curves_bp)
    app.register_blueprint(fixed_points_bp)
    app.register_blueprint(simulation_bp)
    app.register_blueprint(validation_bp)
