"""
Reading cardinal-point summaries from delimited text and writing result rows.

Two input layouts are supported through :class:`ColumnMapping`:

* the native CSV schema (header required)::

    timestamp,isc_a,voc_v,imp_a,vmp_v,u_isc_pct,u_voc_pct,u_imp_pct,u_vmp_pct[,irradiance_wm2,t_module_c]

* NREL-style measurement archives, described by a mapping file (JSON object
  from field name to column header text or zero-based column index, plus
  optional ``delimiter``, ``decimal_separator``, ``header_rows``,
  ``temperature_unit`` and ``timestamp_format`` keys).

Malformed rows never abort a run; each one becomes a :class:`RowDiagnostic`.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Iterable, Mapping, NamedTuple, TextIO

from .sdm_core import CardinalPoints, ValidationError
from .uncertainty import UncertainCardinalPoints

REQUIRED_FIELDS = ("timestamp", "isc", "voc", "imp", "vmp",
                   "u_isc", "u_voc", "u_imp", "u_vmp")
OPTIONAL_FIELDS = ("irradiance", "temperature")

NATIVE_HEADERS = {
    "timestamp": "timestamp",
    "isc": "isc_a",
    "voc": "voc_v",
    "imp": "imp_a",
    "vmp": "vmp_v",
    "u_isc": "u_isc_pct",
    "u_voc": "u_voc_pct",
    "u_imp": "u_imp_pct",
    "u_vmp": "u_vmp_pct",
    "irradiance": "irradiance_wm2",
    "temperature": "t_module_c",
}

CELSIUS_OFFSET = 273.15


class UnreadableInput(OSError):
    pass


class MappingMismatch(ValueError):
    """No data row has as many columns as the mapping requires."""


class SinkWriteFailure(OSError):
    pass


class RowDiagnostic(NamedTuple):
    line: int
    reason: str


@dataclass(frozen=True)
class CurveRecord:
    timestamp: datetime
    cardinal: CardinalPoints
    u_isc_pct: float
    u_voc_pct: float
    u_imp_pct: float
    u_vmp_pct: float
    irradiance: float | None = None
    t_module_k: float | None = None
    source_line: int = 0

    def __post_init__(self):
        pcts = (self.u_isc_pct, self.u_voc_pct, self.u_imp_pct, self.u_vmp_pct)
        if not all(math.isfinite(p) and p >= 0.0 for p in pcts):
            raise ValidationError(f"uncertainty percentages must be >= 0: {pcts}")
        if self.irradiance is not None and not self.irradiance >= 0.0:
            raise ValidationError(f"irradiance must be >= 0: {self.irradiance}")


@dataclass(frozen=True)
class ColumnMapping:
    """
    Where each field lives in a row.

    ``columns`` values are zero-based indices or header texts; header texts
    are resolved against the last header row.
    """

    columns: Mapping[str, int | str]
    delimiter: str = ","
    decimal_separator: str = "."
    header_rows: int = 1
    temperature_unit: str = "C"
    timestamp_format: str | None = None

    def __post_init__(self):
        missing = [f for f in REQUIRED_FIELDS if f not in self.columns]
        if missing:
            raise ValueError(f"mapping lacks required fields: {missing}")
        unknown = set(self.columns) - set(REQUIRED_FIELDS) - set(OPTIONAL_FIELDS)
        if unknown:
            raise ValueError(f"mapping has unknown fields: {sorted(unknown)}")
        targets = list(self.columns.values())
        if len(set(targets)) != len(targets):
            raise ValueError("mapped columns must be distinct")
        if self.temperature_unit not in ("C", "K"):
            raise ValueError("temperature_unit must be 'C' or 'K'")
        if self.header_rows < 0:
            raise ValueError("header_rows must be >= 0")

    @classmethod
    def from_json(cls, text: str) -> "ColumnMapping":
        spec = json.loads(text)
        columns = spec.pop("columns", None)
        if columns is None:
            keys = set(REQUIRED_FIELDS) | set(OPTIONAL_FIELDS)
            columns = {k: spec.pop(k) for k in list(spec) if k in keys}
        return cls(columns=columns, **spec)


NATIVE_MAPPING = ColumnMapping(columns=dict(NATIVE_HEADERS))

# Column order of the NREL PV module validation archives
# (one I-V curve per line, no header, measured value followed by its
# uncertainty). Verify against the archive's user manual before relying on
# it; pass a mapping file otherwise.
NREL_MAPPING = ColumnMapping(
    columns={
        "timestamp": 0,
        "irradiance": 1,
        "temperature": 3,
        "isc": 5,
        "u_isc": 6,
        "imp": 9,
        "u_imp": 10,
        "vmp": 11,
        "u_vmp": 12,
        "voc": 13,
        "u_voc": 14,
    },
    header_rows=0,
    timestamp_format=None,
)


def _parse_float(text: str, decimal_separator: str) -> float:
    text = text.strip()
    if decimal_separator != ".":
        text = text.replace(decimal_separator, ".")
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {text!r}")
    return value


def _parse_timestamp(text: str, fmt: str | None) -> datetime:
    text = text.strip()
    if fmt:
        return datetime.strptime(text, fmt)
    return datetime.fromisoformat(text)


def _resolve(mapping: ColumnMapping, header: list[str] | None) -> dict[str, int]:
    index = {}
    for name, target in mapping.columns.items():
        if isinstance(target, int):
            index[name] = target
            continue
        if header is None:
            raise MappingMismatch(f"field {name!r} mapped by header text but input has no header")
        cleaned = [h.strip() for h in header]
        if target not in cleaned:
            if name in OPTIONAL_FIELDS:
                continue
            raise MappingMismatch(f"header {target!r} for field {name!r} not found")
        index[name] = cleaned.index(target)
    return index


def _record(cells, index, mapping, line) -> CurveRecord:
    num = lambda name: _parse_float(cells[index[name]], mapping.decimal_separator)

    def optional(name):
        if name not in index or not cells[index[name]].strip():
            return None
        return num(name)

    t_module = optional("temperature")
    if t_module is not None and mapping.temperature_unit == "C":
        t_module += CELSIUS_OFFSET
    cardinal = CardinalPoints(i_sc=num("isc"), v_oc=num("voc"),
                              i_mp=num("imp"), v_mp=num("vmp"))
    return CurveRecord(
        timestamp=_parse_timestamp(cells[index["timestamp"]], mapping.timestamp_format),
        cardinal=cardinal,
        u_isc_pct=num("u_isc"),
        u_voc_pct=num("u_voc"),
        u_imp_pct=num("u_imp"),
        u_vmp_pct=num("u_vmp"),
        irradiance=optional("irradiance"),
        t_module_k=t_module,
        source_line=line,
    )


def parse_records(stream: TextIO, mapping: ColumnMapping = NATIVE_MAPPING):
    """
    Parse every data row of ``stream``.

    Returns
    -------
    records : list of CurveRecord
    diagnostics : list of RowDiagnostic
        One entry per data row that failed to parse or validate.

    Raises
    ------
    UnreadableInput
        If the stream cannot be read or decoded.
    MappingMismatch
        If a header text is missing, or no data row is wide enough for the
        mapping.
    """
    records, diagnostics = [], []
    header = None
    index = None
    width = None
    seen_wide_row = False
    try:
        reader = csv.reader(stream, delimiter=mapping.delimiter)
        for row in reader:
            line = reader.line_num
            if line <= mapping.header_rows:
                header = row
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if index is None:
                index = _resolve(mapping, header)
                width = max(index.values()) + 1
            if len(row) < width:
                diagnostics.append(RowDiagnostic(
                    line, f"expected at least {width} columns, got {len(row)}"))
                continue
            seen_wide_row = True
            try:
                records.append(_record(row, index, mapping, line))
            except (ValueError, IndexError) as exc:
                diagnostics.append(RowDiagnostic(line, str(exc)))
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise UnreadableInput(str(exc)) from exc

    if diagnostics and not seen_wide_row:
        raise MappingMismatch(
            f"no data row has the {width} columns the mapping requires")
    return records, diagnostics


def to_uncertain(rec: CurveRecord) -> UncertainCardinalPoints:
    """Convert percent uncertainties to absolute half-widths."""
    cp = rec.cardinal
    return UncertainCardinalPoints(
        cp,
        du_isc=rec.u_isc_pct / 100.0 * abs(cp.i_sc),
        du_voc=rec.u_voc_pct / 100.0 * abs(cp.v_oc),
        du_imp=rec.u_imp_pct / 100.0 * abs(cp.i_mp),
        du_vmp=rec.u_vmp_pct / 100.0 * abs(cp.v_mp),
    )


def record_fields(rec: CurveRecord) -> dict[str, Any]:
    """Native-schema columns of ``rec`` (temperature back in celsius)."""
    cp = rec.cardinal
    t_c = None if rec.t_module_k is None else rec.t_module_k - CELSIUS_OFFSET
    return {
        "timestamp": rec.timestamp.isoformat(),
        "isc_a": cp.i_sc,
        "voc_v": cp.v_oc,
        "imp_a": cp.i_mp,
        "vmp_v": cp.v_mp,
        "u_isc_pct": rec.u_isc_pct,
        "u_voc_pct": rec.u_voc_pct,
        "u_imp_pct": rec.u_imp_pct,
        "u_vmp_pct": rec.u_vmp_pct,
        "irradiance_wm2": rec.irradiance,
        "t_module_c": t_c,
    }


# -- output -----------------------------------------------------------------

class OutputFormat(enum.Enum):
    CSV = "csv"
    JSON = "json"


def _plain(value):
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, datetime):
        return value.isoformat()
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {k: _plain(v) for k, v in dataclasses.asdict(value).items()}
    return value


def _csv_cell(value) -> str:
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        # repr is the shortest string that round-trips the double
        return repr(value)
    return str(value)


def write_results(rows: Iterable[Mapping[str, Any]], fmt: OutputFormat | str,
                  sink: TextIO, columns: list[str] | None = None) -> None:
    """
    Write homogeneous result rows deterministically.

    Column order is ``columns`` if given, otherwise the key order of the first
    row. Floats are rendered with the shortest repr that round-trips.
    """
    fmt = OutputFormat(fmt)
    rows = [dict(r) for r in rows]
    if columns is None:
        columns = list(rows[0]) if rows else []
    for r in rows:
        if list(r) != list(columns) and set(r) != set(columns):
            raise ValueError("rows must share the same fields")
    try:
        if fmt is OutputFormat.CSV:
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(columns)
            for r in rows:
                writer.writerow([_csv_cell(r[c]) for c in columns])
            sink.write(buf.getvalue())
        else:
            payload = [{c: _plain(r[c]) for c in columns} for r in rows]
            sink.write(json.dumps(payload, indent=2, allow_nan=False, ensure_ascii=False))
            sink.write("\n")
    except OSError as exc:
        raise SinkWriteFailure(str(exc)) from exc
