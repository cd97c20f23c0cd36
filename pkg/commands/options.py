"""
Command Options - shared options, run context and exit codes for every command
"""

import functools
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import click
from flask import current_app

import storage
from services.config_service import RunConfig, load_config, validate_overrides
from services.errors import BifurcationError, ConfigError
from services.plot_script_service import plot_script

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


@dataclass(frozen=True)
class RunContext:
    """What a command needs besides its own options."""
    cfg: RunConfig
    prefix: str
    workers: int
    plot_script: bool = False

    def write_csv(self, filename: str, columns: Sequence[str], rows: Iterable[Sequence[Any]],
                  comments: Iterable[Tuple[str, Any]] = (), trailer: Iterable[Tuple[str, Any]] = ()) -> Path:
        return storage.write_csv(filename, columns, rows, self.cfg, prefix=self.prefix,
                                 comments=comments, trailer=trailer)

    def emit_plot(self, name: str, files: Dict[str, Path]) -> Optional[Path]:
        if not self.plot_script:
            return None
        source = plot_script(name, {key: path.name for key, path in files.items()})
        return storage.write_text(f"plot_{name}.py", source, prefix=self.prefix)


def fail(message: str, code: int):
    click.echo(f"Error: {message}", err=True)
    logger.error("exit %d: %s", code, message)
    click.get_current_context().exit(code)


def load_run_config(config_path: Optional[str], overrides: Sequence[str]) -> RunConfig:
    """Check the overrides, then load the file and apply them."""
    success, message = validate_overrides(overrides)
    if not success:
        raise ConfigError(message)
    return load_config(config_path, overrides)


def _workers() -> int:
    threads = current_app.config.get("THREADS", 1)
    if isinstance(threads, bool) or not isinstance(threads, int) or threads < 1:
        raise ConfigError(f"THREADS must be a positive integer, got {threads!r}.")
    return threads


def analysis_command(func):
    """
    Add --config, --set, --out and --plot-script, build the RunContext and map
    failures onto exit codes: 2 configuration, 3 numerical, 4 I/O.
    """

    @click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                  help="TOML config file; every key is optional.")
    @click.option("--set", "overrides", multiple=True, metavar="SECTION.KEY=VALUE",
                  help="Override one config value, e.g. drive.v_plus=0.6. Repeatable.")
    @click.option("--out", default=None, help="Output path prefix (directory with trailing slash, or file stem).")
    @click.option("--plot-script", is_flag=True, default=False,
                  help="Also write a matplotlib script for the output.")
    @functools.wraps(func)
    def wrapper(config_path, overrides, out, plot_script, **kwargs):
        try:
            cfg = load_run_config(config_path, overrides)
            workers = _workers()
        except ConfigError as exc:
            fail(str(exc), EXIT_CONFIG)
        except OSError as exc:
            fail(f"cannot read config: {exc}", EXIT_IO)

        prefix = out if out is not None else (cfg.output.prefix or current_app.config["OUTPUT_PREFIX"])
        run = RunContext(cfg=cfg, prefix=prefix, workers=workers, plot_script=plot_script)
        try:
            return func(run, **kwargs)
        except OSError as exc:
            fail(f"cannot write output: {exc}", EXIT_IO)
        except BifurcationError as exc:
            fail(str(exc), EXIT_NUMERICAL)

    return wrapper
