"""CSV and JSON report writers.

CSV uses commas, LF line endings and a header row; floats carry 17
significant digits so every value round-trips.  JSON holds the same rows as a
list of objects.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .pathset import format_float


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def rows_to_csv(rows: Sequence[Mapping], columns: Sequence[str] | None = None) -> str:
    columns = list(columns or (rows[0].keys() if rows else []))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()


def rows_to_json(rows: Sequence[Mapping], columns: Sequence[str] | None = None) -> str:
    columns = list(columns or (rows[0].keys() if rows else []))
    data = [{c: _json_value(row[c]) for c in columns} for row in rows]
    return json.dumps(data, indent=2) + "\n"


def write_rows(rows: Sequence[Mapping], path: str | Path, fmt: str = "csv",
               columns: Sequence[str] | None = None) -> Path:
    """Write ``rows`` to ``path`` (suffix replaced to match ``fmt``)."""
    if fmt not in ("csv", "json"):
        raise ValueError("format must be 'csv' or 'json'")
    path = Path(path).with_suffix("." + fmt)
    text = rows_to_csv(rows, columns) if fmt == "csv" else rows_to_json(rows, columns)
    path.write_text(text)
    return path


def key_values(pairs: Iterable[tuple[str, object]]) -> list[dict]:
    """Two-column ``quantity, value`` rows from name/value pairs."""
    return [{"quantity": k, "value": v} for k, v in pairs]
