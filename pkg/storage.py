"""
Storage module for the bifurcation analysis
Writes result tables as CSV files with a `#` comment header recording the
package version and the full run configuration.
"""

import csv
import logging
import math
import os
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Tuple

from services import __version__
from services.config_service import RunConfig, flatten

logger = logging.getLogger(__name__)

# Output configuration
OUTPUT_PREFIX = 'results/'


def output_path(filename: str, prefix: Optional[str] = None) -> Path:
    """Prefix joined with a file name; the prefix may end in a directory or a file stem."""
    prefix = OUTPUT_PREFIX if prefix is None else prefix
    return Path(f"{prefix}{filename}")


def format_value(value: Any) -> str:
    """Floats in 17 significant digits, everything else as text."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.16e}"
    if hasattr(value, "item"):
        return format_value(value.item())
    return str(value)


def header_lines(cfg: RunConfig, comments: Iterable[Tuple[str, Any]] = ()) -> list:
    lines = [f"# membif {__version__}"]
    lines += [f"# {key} {format_value(value)}" for key, value in flatten(cfg)]
    lines += [f"# {key} {format_value(value)}" for key, value in comments]
    return lines


def write_csv(filename: str, columns: Sequence[str], rows: Iterable[Sequence[Any]], cfg: RunConfig,
              prefix: Optional[str] = None, comments: Iterable[Tuple[str, Any]] = (),
              trailer: Iterable[Tuple[str, Any]] = ()) -> Path:
    """
    Write one table.

    Args:
        filename: file name appended to the prefix
        columns: column names
        rows: one sequence of values per row
        cfg: configuration recorded in the header
        comments: extra (key, value) metadata lines after the configuration
        trailer: (key, value) metadata lines appended after the last row

    Returns:
        Path of the written file.
    """
    path = output_path(filename, prefix)
    if path.parent != Path(""):
        os.makedirs(path.parent, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        for line in header_lines(cfg, comments):
            handle.write(line + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        count = 0
        for row in rows:
            writer.writerow([format_value(value) for value in row])
            count += 1
        for key, value in trailer:
            handle.write(f"# {key} {format_value(value)}\n")
    logger.info("wrote %s (%d rows)", path, count)
    return path


def write_text(filename: str, text: str, prefix: Optional[str] = None) -> Path:
    path = output_path(filename, prefix)
    if path.parent != Path(""):
        os.makedirs(path.parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
    logger.info("wrote %s", path)
    return path
