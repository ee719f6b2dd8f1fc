"""Tabular sources: in-memory tables plus a CSV backend.

Tables hold raw string cells (None for nulls); type inference and
statistics live in the schema module, which keeps this layer
format-agnostic. Additional backends implement open_source for their
SourceDescriptor kind; the relational kind is declared but intentionally
unimplemented.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

DEFAULT_DELIMITER = ","
DEFAULT_NULL_TOKEN = ""

SOURCE_KINDS = ("csv", "relational-stub")

# Accepted datetime layouts, probed in order; first full match wins.
DATETIME_FORMATS = (
    "%Y-%m-%d",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M:%S",
    "%Y/%m/%d",
)


def parse_number(cell: str) -> float | None:
    try:
        v = float(cell)
    except (TypeError, ValueError):
        return None
    if v != v or v in (float("inf"), float("-inf")):
        return None
    return v


def parse_datetime(cell: str, formats=DATETIME_FORMATS):
    """(epoch_seconds, format) for the first matching layout, else None."""
    for fmt in formats:
        try:
            dt = datetime.strptime(cell, fmt)
        except (TypeError, ValueError):
            continue
        return dt.replace(tzinfo=timezone.utc).timestamp(), fmt
    return None


def format_datetime(epoch: float, fmt: str) -> str:
    return datetime.fromtimestamp(float(epoch), tz=timezone.utc).strftime(fmt)


class Table:
    """Columnar dataset; cells are str or None. Immutable by convention.

    Equality compares column names and cell values (the table name is
    identity metadata, not part of the value).
    """

    def __init__(self, name: str, columns):
        names = [c for c, _ in columns]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate column names in table {name!r}")
        lengths = {len(v) for _, v in columns}
        if len(lengths) > 1:
            raise ValueError(f"ragged columns in table {name!r}: lengths {sorted(lengths)}")
        self.name = name
        self.columns = [(c, list(v)) for c, v in columns]
        self.row_count = lengths.pop() if lengths else 0
        self._numeric_cache: dict[str, np.ndarray] = {}
        self._code_cache: dict[str, tuple[np.ndarray, dict]] = {}

    @property
    def column_names(self) -> list[str]:
        return [c for c, _ in self.columns]

    def column(self, name: str) -> list:
        for c, v in self.columns:
            if c == name:
                return v
        raise KeyError(f"no column {name!r} in table {self.name!r}")

    def numeric_column(self, name: str) -> np.ndarray:
        """Column as float64 with NaN for nulls; datetimes become epoch seconds.

        The parse mode (number vs datetime) is chosen from the first
        parseable cell and cached, so repeated predicate scans are cheap.
        """
        if name not in self._numeric_cache:
            values = self.column(name)
            as_datetime = False
            for cell in values:
                if cell is None:
                    continue
                if parse_number(cell) is not None:
                    break
                if parse_datetime(cell) is not None:
                    as_datetime = True
                    break
            out = np.full(len(values), np.nan)
            for i, cell in enumerate(values):
                if cell is None:
                    continue
                if as_datetime:
                    parsed = parse_datetime(cell)
                    if parsed is not None:
                        out[i] = parsed[0]
                else:
                    v = parse_number(cell)
                    if v is not None:
                        out[i] = v
            self._numeric_cache[name] = out
        return self._numeric_cache[name]

    def coded_column(self, name: str) -> tuple[np.ndarray, dict]:
        """Column as int64 category codes plus the value->code mapping; null is -1."""
        if name not in self._code_cache:
            values = self.column(name)
            mapping: dict[str, int] = {}
            codes = np.empty(len(values), dtype=np.int64)
            for i, cell in enumerate(values):
                if cell is None:
                    codes[i] = -1
                    continue
                code = mapping.get(cell)
                if code is None:
                    code = len(mapping)
                    mapping[cell] = code
                codes[i] = code
            self._code_cache[name] = (codes, mapping)
        return self._code_cache[name]

    def row(self, i: int) -> list:
        return [v[i] for _, v in self.columns]

    def take(self, indices) -> "Table":
        """New table holding the given rows, in the given order."""
        cols = [(c, [v[i] for i in indices]) for c, v in self.columns]
        return Table(self.name, cols)

    def with_column(self, name: str, values: list) -> "Table":
        """New table with one column replaced."""
        if name not in self.column_names:
            raise KeyError(f"no column {name!r} in table {self.name!r}")
        cols = [(c, values if c == name else v) for c, v in self.columns]
        return Table(self.name, cols)

    def concat(self, other: "Table") -> "Table":
        if self.column_names != other.column_names:
            raise ValueError("column mismatch in concat")
        cols = [(c, v + other.column(c)) for c, v in self.columns]
        return Table(self.name, cols)

    def __eq__(self, other):
        if not isinstance(other, Table):
            return NotImplemented
        return self.columns == other.columns

    def __repr__(self):
        return f"Table({self.name!r}, {len(self.columns)} cols x {self.row_count} rows)"


@dataclass
class SourceDescriptor:
    kind: str
    location: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}; expected one of {SOURCE_KINDS}")

    @classmethod
    def from_dict(cls, d: dict) -> "SourceDescriptor":
        return cls(kind=d["kind"], location=d["location"], options=dict(d.get("options", {})))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "location": self.location, "options": dict(self.options)}


def _csv_options(options: dict) -> tuple[str, str, bool]:
    delimiter = options.get("delimiter", DEFAULT_DELIMITER)
    null_token = options.get("null_token", DEFAULT_NULL_TOKEN)
    header = options.get("header", True)
    if isinstance(header, str):
        header = header.lower() not in ("false", "0", "no")
    return delimiter, null_token, header


def open_source(desc: SourceDescriptor) -> Table:
    """Materialize a table from a source descriptor.

    Only csv is implemented; relational-stub parses fine but is rejected
    here so the source seam stays visible and testable.
    """
    if desc.kind == "relational-stub":
        raise NotImplementedError(
            "relational sources are a declared stub; only the csv backend is implemented"
        )
    delimiter, null_token, header = _csv_options(desc.options)
    path = Path(desc.location)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        rows = list(reader)
    if not rows:
        raise ValueError(f"empty source file {path}")
    if header:
        names = rows[0]
        data_rows = rows[1:]
    else:
        names = [f"col{i}" for i in range(len(rows[0]))]
        data_rows = rows
    width = len(names)
    columns: list[list] = [[] for _ in range(width)]
    for i, row in enumerate(data_rows, start=1):
        if len(row) != width:
            raise ValueError(f"malformed CSV row {i}: expected {width} fields, got {len(row)}")
        for j, cell in enumerate(row):
            columns[j].append(None if cell == null_token else cell)
    return Table(path.stem, list(zip(names, columns)))


def write_table(table: Table, path, options: dict | None = None) -> None:
    """Write RFC-4180-style CSV: header row, minimal quoting, LF line ends.

    Byte-deterministic for identical input; nulls become the configured
    null token.
    """
    options = options or {}
    delimiter, null_token, _ = _csv_options(options)
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(table.column_names)
        cols = [v for _, v in table.columns]
        for i in range(table.row_count):
            writer.writerow([null_token if col[i] is None else str(col[i]) for col in cols])
