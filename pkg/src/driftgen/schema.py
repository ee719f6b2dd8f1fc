"""Schema extraction: logical type inference and column-level statistics.

The profiles feed every downstream generator, so a schema file has to be
self-contained: besides ranges, moments, percentiles and equi-depth
histogram bounds it carries the full non-null category frequencies and a
deterministic quantile-gridded numeric subsample for KDE refitting.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .tabular import DATETIME_FORMATS, Table, parse_datetime, parse_number

PERCENTILE_POINTS = (0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99)
DEFAULT_BUCKET_COUNT = 100
TOP_K = 10
SAMPLE_VALUES = 10
KDE_SAMPLE_CAP = 10_000
# distinct-value frequency tables are kept for numeric columns up to this
# many distincts (zipfian predicate sampling needs ranked values)
NUMERIC_VALUE_TABLE_CAP = 1000
PARSE_FRACTION = 0.99


class LogicalType(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"
    DATETIME = "datetime"
    TEXT = "text"


@dataclass
class ColumnProfile:
    name: str
    logical_type: LogicalType
    null_fraction: float
    min: float | None = None
    max: float | None = None
    mean: float | None = None
    std: float | None = None
    skewness: float | None = None
    percentiles: list = field(default_factory=list)
    histogram_bounds: list = field(default_factory=list)
    distinct_count: int = 0
    top_k: list = field(default_factory=list)
    sample_values: list = field(default_factory=list)
    # generator-facing extras
    integer_like: bool = False
    datetime_format: str | None = None
    categories: list | None = None
    kde_sample: list | None = None

    def percentile(self, p: float) -> float:
        for q, v in self.percentiles:
            if q == p:
                return v
        raise KeyError(f"percentile {p} not profiled for column {self.name!r}")

    def is_numeric_like(self) -> bool:
        return self.logical_type in (LogicalType.NUMERIC, LogicalType.DATETIME)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "logical_type": self.logical_type.value,
            "null_fraction": self.null_fraction,
            "min": self.min,
            "max": self.max,
            "mean": self.mean,
            "std": self.std,
            "skewness": self.skewness,
            "percentiles": [[p, v] for p, v in self.percentiles],
            "histogram_bounds": list(self.histogram_bounds),
            "distinct_count": self.distinct_count,
            "top_k": [[v, f] for v, f in self.top_k],
            "sample_values": list(self.sample_values),
            "integer_like": self.integer_like,
            "datetime_format": self.datetime_format,
            "categories": None if self.categories is None else [[v, f] for v, f in self.categories],
            "kde_sample": self.kde_sample,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ColumnProfile":
        return cls(
            name=d["name"],
            logical_type=LogicalType(d["logical_type"]),
            null_fraction=d["null_fraction"],
            min=d["min"],
            max=d["max"],
            mean=d["mean"],
            std=d["std"],
            skewness=d["skewness"],
            percentiles=[(p, v) for p, v in d["percentiles"]],
            histogram_bounds=list(d["histogram_bounds"]),
            distinct_count=d["distinct_count"],
            top_k=[(v, f) for v, f in d["top_k"]],
            sample_values=list(d["sample_values"]),
            integer_like=d.get("integer_like", False),
            datetime_format=d.get("datetime_format"),
            categories=None if d.get("categories") is None else [(v, f) for v, f in d["categories"]],
            kde_sample=d.get("kde_sample"),
        )


@dataclass
class TableSchema:
    table_name: str
    columns: list
    row_count: int
    bucket_count: int = DEFAULT_BUCKET_COUNT

    def column(self, name: str) -> ColumnProfile:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(f"no column {name!r} in schema of {self.table_name!r}")

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def to_dict(self) -> dict:
        return {
            "table_name": self.table_name,
            "row_count": self.row_count,
            "bucket_count": self.bucket_count,
            "columns": [c.to_dict() for c in self.columns],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "TableSchema":
        return cls(
            table_name=d["table_name"],
            columns=[ColumnProfile.from_dict(c) for c in d["columns"]],
            row_count=d["row_count"],
            bucket_count=d.get("bucket_count", DEFAULT_BUCKET_COUNT),
        )

    @classmethod
    def from_json(cls, text: str) -> "TableSchema":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "TableSchema":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def infer_logical_type(values: list) -> LogicalType:
    """Type a column from its raw cells.

    Numeric/datetime win when at least 99% of non-null cells parse;
    otherwise low-cardinality columns are categorical and the rest text.
    """
    non_null = [v for v in values if v is not None]
    if not non_null:
        raise ValueError("untypeable column: all values are null")
    n = len(non_null)
    numeric = sum(1 for v in non_null if parse_number(v) is not None)
    if numeric / n >= PARSE_FRACTION:
        return LogicalType.NUMERIC
    as_datetime = sum(1 for v in non_null if parse_datetime(v) is not None)
    if as_datetime / n >= PARSE_FRACTION:
        return LogicalType.DATETIME
    distinct = len(set(non_null))
    if distinct <= max(100, 0.05 * len(values)):
        return LogicalType.CATEGORICAL
    return LogicalType.TEXT


def nearest_rank_percentile(sorted_values: np.ndarray, p: float) -> float:
    """Nearest-rank percentile over pre-sorted values (exact, no interpolation)."""
    n = len(sorted_values)
    rank = int(np.ceil(p * n))
    return float(sorted_values[min(max(rank, 1), n) - 1])


def equi_depth_bounds(sorted_values: np.ndarray, bucket_count: int) -> list[float]:
    """B+1 bounds splitting sorted values into B groups whose sizes differ by <= 1."""
    n = len(sorted_values)
    sizes = np.full(bucket_count, n // bucket_count, dtype=np.int64)
    sizes[: n % bucket_count] += 1
    cuts = np.cumsum(sizes)
    bounds = [float(sorted_values[0])]
    for c in cuts:
        bounds.append(float(sorted_values[min(c, n) - 1]))
    return bounds


def _skewness(values: np.ndarray) -> float:
    std = float(values.std())
    if std == 0.0:
        return 0.0  # constant column convention: avoids 0/0
    centered = values - values.mean()
    return float((centered**3).mean() / std**3)


def _quantile_grid_sample(sorted_values: np.ndarray, cap: int) -> list[float]:
    n = len(sorted_values)
    if n <= cap:
        return [float(v) for v in sorted_values]
    idx = np.round(np.linspace(0, n - 1, cap)).astype(np.int64)
    return [float(v) for v in sorted_values[idx]]


def _dominant_datetime_format(non_null: list) -> str:
    counts: Counter = Counter()
    for v in non_null:
        parsed = parse_datetime(v)
        if parsed is not None:
            counts[parsed[1]] += 1
    fmt, _ = max(counts.items(), key=lambda kv: (kv[1], -DATETIME_FORMATS.index(kv[0])))
    return fmt


def profile_column(values: list, logical_type: LogicalType, bucket_count: int = DEFAULT_BUCKET_COUNT) -> ColumnProfile:
    """Compute the per-column statistics used by the generators."""
    if bucket_count < 1:
        raise ValueError("bucket_count must be >= 1")
    total = len(values)
    non_null = [v for v in values if v is not None]
    null_fraction = (total - len(non_null)) / total if total else 0.0
    name = ""  # filled in by extract_schema

    if logical_type in (LogicalType.NUMERIC, LogicalType.DATETIME):
        fmt = None
        if logical_type == LogicalType.DATETIME:
            fmt = _dominant_datetime_format(non_null)
            parsed = [parse_datetime(v) for v in non_null]
            nums = np.array([p[0] for p in parsed if p is not None], dtype=np.float64)
        else:
            nums = np.array(
                [x for x in (parse_number(v) for v in non_null) if x is not None],
                dtype=np.float64,
            )
        if len(nums) < 2:
            raise ValueError("numeric column needs >= 2 non-null values (std undefined)")
        nums.sort()
        uniques, counts = np.unique(nums, return_counts=True)
        categories = None
        if len(uniques) <= NUMERIC_VALUE_TABLE_CAP:
            order = np.lexsort((uniques, -counts))
            categories = [(float(uniques[i]), float(counts[i] / len(nums))) for i in order]
            top = categories[:TOP_K]
        else:
            order = np.lexsort((uniques, -counts))[:TOP_K]
            top = [(float(uniques[i]), float(counts[i] / len(nums))) for i in order]
        return ColumnProfile(
            name=name,
            logical_type=logical_type,
            null_fraction=null_fraction,
            min=float(nums[0]),
            max=float(nums[-1]),
            mean=float(nums.mean()),
            std=float(nums.std()),
            skewness=_skewness(nums),
            percentiles=[(p, nearest_rank_percentile(nums, p)) for p in PERCENTILE_POINTS],
            histogram_bounds=equi_depth_bounds(nums, bucket_count),
            distinct_count=int(len(uniques)),
            top_k=top,
            sample_values=non_null[:SAMPLE_VALUES],
            integer_like=logical_type == LogicalType.NUMERIC and bool(np.all(nums == np.round(nums))),
            datetime_format=fmt,
            categories=categories,
            kde_sample=_quantile_grid_sample(nums, KDE_SAMPLE_CAP),
        )

    counts = Counter(non_null)
    # frequency desc, value asc: deterministic ranking
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    n = len(non_null)
    categories = [(v, c / n) for v, c in ranked]
    seen: list = []
    for v in non_null:
        if v not in seen:
            seen.append(v)
        if len(seen) == SAMPLE_VALUES:
            break
    return ColumnProfile(
        name=name,
        logical_type=logical_type,
        null_fraction=null_fraction,
        distinct_count=len(ranked),
        top_k=categories[:TOP_K],
        sample_values=seen,
        categories=categories,
    )


def extract_schema(table: Table, bucket_count: int = DEFAULT_BUCKET_COUNT) -> TableSchema:
    """One ColumnProfile per column, in source order."""
    if table.row_count == 0:
        raise ValueError(f"cannot profile empty table {table.name!r}")
    profiles = []
    for col_name, values in table.columns:
        try:
            logical_type = infer_logical_type(values)
            profile = profile_column(values, logical_type, bucket_count)
        except ValueError as exc:
            raise ValueError(f"column {col_name!r}: {exc}") from exc
        profile.name = col_name
        profiles.append(profile)
    return TableSchema(
        table_name=table.name,
        columns=profiles,
        row_count=table.row_count,
        bucket_count=bucket_count,
    )
