"""CSV and JSON emission with fixed column order and exact float text."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, is_dataclass
from typing import Any, Iterable, Mapping, Sequence, TextIO

import numpy as np

__all__ = ["format_cell", "to_row", "write_csv", "write_json", "emit"]


def format_cell(value: Any) -> str:
    """Text for one CSV cell: ``repr`` for floats so output round-trips exactly."""
    value = _plain(value)
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    if isinstance(value, complex):
        return repr(value)
    return str(value)


def _plain(value: Any) -> Any:
    """Convert numpy scalars to the matching Python scalar."""
    if isinstance(value, np.generic):
        return value.item()
    return value


def to_row(record: Any, columns: Sequence[str]) -> dict[str, Any]:
    """Project a dataclass or mapping onto ``columns``."""
    data = asdict(record) if is_dataclass(record) else dict(record)
    return {name: data[name] for name in columns}


def write_csv(
    rows: Iterable[Mapping[str, Any]],
    columns: Sequence[str],
    stream: TextIO,
    comments: Sequence[str] = (),
) -> None:
    """Gnuplot-ready CSV: ``#`` comment lines, a header row, then data rows."""
    for line in comments:
        stream.write(f"# {line}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row[name]) for name in columns])


def _json_value(value: Any) -> Any:
    value = _plain(value)
    if isinstance(value, float) and (math.isnan(value) or math.isinf(value)):
        return None
    if isinstance(value, complex):
        return [_json_value(value.real), _json_value(value.imag)]
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    return value


def write_json(
    rows: Iterable[Mapping[str, Any]],
    columns: Sequence[str],
    stream: TextIO,
    comments: Sequence[str] = (),
) -> None:
    """JSON document ``{"comments": [...], "rows": [...]}``; NaN becomes ``null``."""
    payload = {
        "comments": list(comments),
        "rows": [{name: _json_value(row[name]) for name in columns} for row in rows],
    }
    json.dump(payload, stream, indent=2)
    stream.write("\n")


def emit(
    records: Iterable[Any],
    columns: Sequence[str],
    stream: TextIO,
    fmt: str = "csv",
    comments: Sequence[str] = (),
) -> None:
    """Write dataclass or mapping records in ``fmt`` (``csv`` or ``json``)."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown output format {fmt!r}")
    rows = [to_row(r, columns) for r in records]
    if fmt == "json":
        write_json(rows, columns, stream, comments)
    else:
        write_csv(rows, columns, stream, comments)
