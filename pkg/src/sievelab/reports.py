"""Report serialization: one JSON shape for every experiment, CSV for tables.

Every payload carries a schema_version and the resolved configuration it
was produced from, so a report is enough to reproduce itself.  Values are
converted conservatively: exact rationals become "num/den" strings rather
than floats, complex numbers become {"re": .., "im": ..} pairs, and any
dataclass in the tree is flattened field by field.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

SCHEMA_VERSION = 1


def to_jsonable(value: Any) -> Any:
    """Recursively convert experiment objects into JSON-safe structures."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        # JSON has no inf/nan literals; stringify the rare non-finite value.
        return value if np.isfinite(value) else repr(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, enum.Enum):
        return to_jsonable(value.value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return to_jsonable(float(value))
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            f.name: to_jsonable(getattr(value, f.name))
            for f in dataclasses.fields(value)
        }
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (set, frozenset)):
        return [to_jsonable(v) for v in sorted(value)]
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    # Polynomials and other display-only objects serialize as their text.
    return str(value)


def report_payload(kind: str, config: Mapping[str, Any], body: Any) -> dict:
    """Assemble the canonical report envelope."""
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "config": to_jsonable(dict(config)),
        "result": to_jsonable(body),
    }


def dump_json(payload: Any) -> str:
    """Canonical JSON text: sorted keys, stable layout, trailing newline."""
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def dump_json_lines(rows: Sequence[Any]) -> str:
    """One compact JSON document per line (hit streams)."""
    return "".join(
        json.dumps(to_jsonable(row), sort_keys=True) + "\n" for row in rows
    )


def dump_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Delimited table with a header row; cells pass through to_jsonable."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def _csv_cell(value: Any) -> Any:
    converted = to_jsonable(value)
    if isinstance(converted, (dict, list)):
        return json.dumps(converted, sort_keys=True)
    return converted
