"""Serialization helpers: conversions, envelopes, and CSV quoting."""

import dataclasses
import enum
import json
import math
from fractions import Fraction

import numpy as np

from sievelab.reports import (
    SCHEMA_VERSION,
    dump_csv,
    dump_json,
    dump_json_lines,
    report_payload,
    to_jsonable,
)


class _Color(enum.Enum):
    RED = "red"


@dataclasses.dataclass(frozen=True)
class _Inner:
    count: int
    ratio: Fraction


@dataclasses.dataclass(frozen=True)
class _Outer:
    name: str
    inner: _Inner
    tags: tuple


def test_scalar_passthrough():
    assert to_jsonable(None) is None
    assert to_jsonable(True) is True
    assert to_jsonable(7) == 7
    assert to_jsonable("x") == "x"
    assert to_jsonable(1.5) == 1.5


def test_nonfinite_floats_become_strings():
    assert to_jsonable(math.inf) == "inf"
    assert to_jsonable(-math.inf) == "-inf"
    assert to_jsonable(math.nan) == "nan"


def test_exact_and_complex_values():
    assert to_jsonable(Fraction(3, 7)) == "3/7"
    assert to_jsonable(Fraction(-1, 2)) == "-1/2"
    assert to_jsonable(2 + 3j) == {"re": 2.0, "im": 3.0}


def test_numpy_values():
    assert to_jsonable(np.int64(5)) == 5
    assert to_jsonable(np.float64(0.25)) == 0.25
    assert to_jsonable(np.array([1, 2, 3])) == [1, 2, 3]
    assert isinstance(to_jsonable(np.int64(5)), int)


def test_enum_and_set_and_nested_dataclass():
    assert to_jsonable(_Color.RED) == "red"
    assert to_jsonable({3, 1, 2}) == [1, 2, 3]
    obj = _Outer("top", _Inner(2, Fraction(1, 3)), (1, "a"))
    assert to_jsonable(obj) == {
        "name": "top",
        "inner": {"count": 2, "ratio": "1/3"},
        "tags": [1, "a"],
    }


def test_payload_envelope_and_json_text():
    payload = report_payload("demo", {"alpha": 1}, {"value": Fraction(1, 2)})
    assert payload["schema_version"] == SCHEMA_VERSION
    assert payload["kind"] == "demo"
    assert payload["config"] == {"alpha": 1}
    text = dump_json(payload)
    back = json.loads(text)
    assert back["result"]["value"] == "1/2"
    assert text.endswith("\n")
    # sorted keys: config before kind before result.
    assert text.index('"config"') < text.index('"kind"') < text.index('"result"')


def test_json_lines_one_per_row():
    text = dump_json_lines([{"a": 1}, {"a": 2}])
    lines = text.splitlines()
    assert len(lines) == 2
    assert json.loads(lines[1]) == {"a": 2}


def test_csv_structured_cells_are_json():
    text = dump_csv(("k", "v"), [("xs", [1, 2]), ("q", Fraction(1, 3))])
    lines = text.splitlines()
    assert lines[0] == "k,v"
    assert lines[1] == 'xs,"[1, 2]"'
    assert lines[2] == "q,1/3"
