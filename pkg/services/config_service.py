"""
Config Service Module - run configuration for the analysis commands
Reads TOML config files and `section.key=value` overrides into a frozen RunConfig.
Every key is optional; the defaults reproduce the reference analysis.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from services.averaging_service import PulseDrive
from services.bifurcation_service import sample_axis
from services.errors import ConfigError, DomainError
from services.fixed_point_service import ScanSpec
from services.model_service import ModelParams
from services.simulation_service import IntegratorSpec

logger = logging.getLogger(__name__)


def _check_count(name: str, value: Any, minimum: int = 1) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {value!r}.")


def _check_number(name: str, value: Any) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise DomainError(f"{name} must be a finite number, got {value!r}.")


@dataclass(frozen=True)
class SignMapWindow:
    """Sign of g over (x, V-) at a fixed V+."""
    v_plus: float = 0.6
    x_lo: float = 1e-3
    x_hi: float = 1.0
    n_x: int = 201
    v_minus_lo: float = -1.0
    v_minus_hi: float = -0.3
    n_v_minus: int = 141

    def __post_init__(self):
        _check_number("sign_map.v_plus", self.v_plus)
        _check_count("sign_map.n_x", self.n_x, 2)
        _check_count("sign_map.n_v_minus", self.n_v_minus, 2)
        sample_axis((self.x_lo, self.x_hi), self.n_x)
        sample_axis((self.v_minus_lo, self.v_minus_hi), self.n_v_minus)
        if self.x_lo == self.x_hi or self.v_minus_lo == self.v_minus_hi:
            raise DomainError("sign_map window must have a non-zero area.")
        if not 0.0 < self.x_lo:
            raise DomainError(f"sign_map.x_lo must be positive, got {self.x_lo!r}.")


@dataclass(frozen=True)
class NstMapWindow:
    v_plus_lo: float = 0.3
    v_plus_hi: float = 0.8
    n_v_plus: int = 251
    v_minus_lo: float = -1.0
    v_minus_hi: float = -0.3
    n_v_minus: int = 251

    def __post_init__(self):
        _check_count("nst_map.n_v_plus", self.n_v_plus)
        _check_count("nst_map.n_v_minus", self.n_v_minus)
        sample_axis((self.v_plus_lo, self.v_plus_hi), self.n_v_plus)
        sample_axis((self.v_minus_lo, self.v_minus_hi), self.n_v_minus)


@dataclass(frozen=True)
class CurveSampling:
    """x samples of curve A (log-spaced) and V+ samples of curves B, C and D (uniform)."""
    x_lo: float = 0.02
    x_hi: float = 0.95
    n_x: int = 2000
    v_plus_lo: float = 0.3
    v_plus_hi: float = 0.8
    n_v_plus: int = 501
    iterate: bool = False

    def __post_init__(self):
        _check_count("curves.n_x", self.n_x, 2)
        _check_count("curves.n_v_plus", self.n_v_plus, 2)
        if not 0.0 < self.x_lo < self.x_hi < 1.0:
            raise DomainError(f"curves.x_lo/x_hi must satisfy 0 < lo < hi < 1, got ({self.x_lo!r}, {self.x_hi!r}).")
        if not 0.0 < self.v_plus_lo < self.v_plus_hi:
            raise DomainError("curves.v_plus_lo/v_plus_hi must satisfy 0 < lo < hi.")
        if not isinstance(self.iterate, bool):
            raise DomainError(f"curves.iterate must be true or false, got {self.iterate!r}.")


@dataclass(frozen=True)
class SimulationSettings:
    x0: float = 0.2
    n_periods: int = 500
    tail_fraction: float = 0.2
    basin_lo: float = 0.05
    basin_hi: float = 0.95
    basin_n: int = 19

    def __post_init__(self):
        _check_number("simulation.x0", self.x0)
        if not 0.0 < self.x0 < 1.0:
            raise DomainError(f"simulation.x0 must lie in (0, 1), got {self.x0!r}.")
        _check_count("simulation.n_periods", self.n_periods, 0)
        _check_number("simulation.tail_fraction", self.tail_fraction)
        if not 0.0 < self.tail_fraction <= 1.0:
            raise DomainError(f"simulation.tail_fraction must lie in (0, 1], got {self.tail_fraction!r}.")
        _check_count("simulation.basin_n", self.basin_n)
        sample_axis((self.basin_lo, self.basin_hi), self.basin_n)
        if not 0.0 < self.basin_lo <= self.basin_hi < 1.0:
            raise DomainError("simulation.basin_lo/basin_hi must lie in (0, 1).")

    def basin_states(self):
        return sample_axis((self.basin_lo, self.basin_hi), self.basin_n)


@dataclass(frozen=True)
class ValidationSettings:
    """Grid resolution for the boundary-gap checks and the averaging sample count."""
    resolution: int = 81
    samples: int = 50
    seed: int = 0

    def __post_init__(self):
        _check_count("validation.resolution", self.resolution, 2)
        _check_count("validation.samples", self.samples)
        _check_count("validation.seed", self.seed, 0)


@dataclass(frozen=True)
class OutputSettings:
    """Path prefix for written files; empty means the application's OUTPUT_PREFIX."""
    prefix: str = ""

    def __post_init__(self):
        if not isinstance(self.prefix, str):
            raise DomainError(f"output.prefix must be a string, got {self.prefix!r}.")


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=ModelParams)
    drive: PulseDrive = field(default_factory=PulseDrive)
    sign_map: SignMapWindow = field(default_factory=SignMapWindow)
    nst_map: NstMapWindow = field(default_factory=NstMapWindow)
    curves: CurveSampling = field(default_factory=CurveSampling)
    scan: ScanSpec = field(default_factory=ScanSpec)
    integrator: IntegratorSpec = field(default_factory=IntegratorSpec)
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    validation: ValidationSettings = field(default_factory=ValidationSettings)
    output: OutputSettings = field(default_factory=OutputSettings)


SECTIONS = {f.name: f.default_factory for f in fields(RunConfig)}


def _known_keys(section: str) -> List[str]:
    return [f.name for f in fields(SECTIONS[section])]


def parse_override(text: str) -> Tuple[str, str, Any]:
    """
    Split `section.key=value` and parse value with the TOML value grammar.

    Raises:
        ConfigError: for a malformed override.
    """
    name, sep, raw = text.partition("=")
    section, dot, key = name.strip().partition(".")
    if not sep or not dot or not section or not key or "." in key:
        raise ConfigError(f"Override {text!r} is not of the form section.key=value.")
    try:
        value = tomllib.loads(f"value = {raw.strip()}")["value"]
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"Override {text!r} has an unparsable value: {exc}") from exc
    return section, key, value


def _check_key(section: str, key: str) -> None:
    if section not in SECTIONS:
        raise ConfigError(f"Unknown config section {section!r}; expected one of {sorted(SECTIONS)}.")
    if key not in _known_keys(section):
        raise ConfigError(f"Unknown config key {section}.{key}; expected one of {_known_keys(section)}.")


def validate_overrides(overrides: Sequence[str]) -> Tuple[bool, str]:
    """
    Check override syntax and names without building a config.

    Returns:
        tuple: (success: bool, message: str)
    """
    for text in overrides:
        try:
            section, key, _ = parse_override(text)
            _check_key(section, key)
        except ConfigError as exc:
            return False, str(exc)
    return True, f"{len(overrides)} override(s) accepted."


def build_config(document: Dict[str, Any]) -> RunConfig:
    """
    RunConfig from a nested {section: {key: value}} mapping.

    Raises:
        ConfigError: for unknown names, wrong types or violated invariants.
    """
    sections = {}
    for section, values in document.items():
        if section not in SECTIONS:
            raise ConfigError(f"Unknown config section {section!r}; expected one of {sorted(SECTIONS)}.")
        if not isinstance(values, dict):
            raise ConfigError(f"Config section {section!r} must hold key = value pairs.")
        for key, value in values.items():
            _check_key(section, key)
            if isinstance(value, dict):
                raise ConfigError(f"Config key {section}.{key} must hold a value, not a table.")
        try:
            sections[section] = SECTIONS[section](**values)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"Invalid [{section}]: {exc}") from exc
    return replace(RunConfig(), **sections)


def load_config(path: Optional[str] = None, overrides: Sequence[str] = ()) -> RunConfig:
    """
    Read a TOML config file (optional) and apply overrides on top of it.

    Raises:
        ConfigError: for malformed files or overrides and invalid values.
        OSError: when the file cannot be read.
    """
    document: Dict[str, Dict[str, Any]] = {}
    if path:
        with open(path, "rb") as handle:
            try:
                document = tomllib.load(handle)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"Config file {path} is not valid TOML: {exc}") from exc
        logger.debug("loaded config file %s", path)
    for text in overrides:
        section, key, value = parse_override(text)
        _check_key(section, key)
        current = document.setdefault(section, {})
        if not isinstance(current, dict):
            raise ConfigError(f"Config section {section!r} must hold key = value pairs.")
        current[key] = value
    return build_config(document)


def flatten(cfg: RunConfig) -> List[Tuple[str, Any]]:
    """Every config value as (section.key, value), sorted by name."""
    pairs = []
    for section, values in asdict(cfg).items():
        for key, value in values.items():
            pairs.append((f"{section}.{key}", value))
    return sorted(pairs)
