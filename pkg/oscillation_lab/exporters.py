"""
exporters module
Provides utilities for exporting profiles, reports and descriptors to JSON and
CSV with canonical number formatting, so reruns write byte-identical files.
"""

import csv
import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from oscillation_lab.ext_real import ExtReal


def format_cell(value) -> str:
    """
    Canonical text for one table cell: floats by ``repr``, ``Fraction`` as
    ``p/q``, INF as ``inf``.

    :param value: Cell value.
    :type value: Any
    :returns: The cell text.
    :rtype: str
    """
    if isinstance(value, ExtReal):
        return "inf" if value.is_inf else format_cell(value.value)
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, np.integer):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return "inf" if value == float("inf") else repr(value)
    return str(value)


def json_default(obj):
    """
    ``json.dump`` hook for the number types used across the package.

    :raises TypeError: For anything else, as ``json`` expects.
    """
    if isinstance(obj, ExtReal):
        if obj.is_inf:
            return "inf"
        return format_cell(obj.value) if isinstance(obj.value, Fraction) else float(obj.value)
    if isinstance(obj, Fraction):
        return format_cell(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def dump_to_json(data, filepath: str) -> None:
    """
    Write data out as JSON to the specified file path, creating parent
    directories if necessary and overwriting any existing file.

    :param data: The data to serialize to JSON.
    :type data: list[dict] or dict
    :param filepath: Filesystem path where the JSON file will be written.
    :type filepath: str
    :returns: None
    :rtype: None
    :raises OSError: If the target directory cannot be created or file cannot be opened.
    :raises TypeError: If `data` is not serializable to JSON.
    """
    path = Path(filepath)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False, default=json_default)
        f.write("\n")


def dump_to_csv(header: Sequence[str], rows: Iterable[Sequence], filepath: str, footer: dict | None = None) -> None:
    """
    Write a table as CSV with a header row, rows in the given order and
    optional ``# key=value`` footer lines.

    :param header: Column names.
    :type header: Sequence[str]
    :param rows: Table rows, each as long as the header.
    :type rows: Iterable[Sequence]
    :param filepath: Filesystem path where the CSV file will be written.
    :type filepath: str
    :param footer: Summary values such as the verdict.
    :type footer: dict or None
    :returns: None
    :rtype: None
    :raises ValueError: If a row length does not match the header.
    """
    path = Path(filepath)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row {row!r} has {len(row)} cells for {len(header)} columns")
            writer.writerow([format_cell(v) for v in row])
        for key, value in (footer or {}).items():
            f.write(f"# {key}={format_cell(value)}\n")
