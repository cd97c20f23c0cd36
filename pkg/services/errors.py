"""
Errors raised by the analysis services.
Commands map these onto process exit codes.
"""


class BifurcationError(Exception):
    """Base class for every failure raised by the analysis services."""


class DomainError(BifurcationError, ValueError):
    """An argument lies outside the domain of the model, or a domain object is invalid."""


class RateOverflowError(BifurcationError, OverflowError):
    """A linear-domain rate does not fit in a double; compare in the log domain instead."""


class IntegrationError(BifurcationError):
    """The pulse integrator hit its sub-step cap."""


class InvalidBracketError(BifurcationError):
    """A parameter bracket does not enclose the requested transition."""


class CurveRangeError(BifurcationError):
    """A closed-form curve expression left its range of validity."""


class TrajectoryTooShortError(BifurcationError):
    """A trajectory holds too few periods for the requested statistic."""


class ConfigError(BifurcationError):
    """The run configuration is malformed or violates an invariant."""
