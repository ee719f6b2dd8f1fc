"""Data drift operations over tables.

Four parameterized transformations (cardinality scaling, insert/delete
updates, distribution skewing, outlier injection) plus sequential
composition with re-profiling between steps. Every operation is a pure
function of (table, parameters, seed).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .generate import generate_rows, render_numeric
from .rng import substream
from .schema import LogicalType, TableSchema, extract_schema, infer_logical_type
from .tabular import Table

DATA_DRIFT_OPS = ("scale_cardinality", "update_cardinality", "shift_distribution", "inject_outliers")

# Skewness of the skew-normal family is bounded; targets at or above this
# magnitude are unreachable.
SKEW_NORMAL_MAX_SKEW = 0.9952


@dataclass
class DriftThresholds:
    alpha: float
    epsilon: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must be in (0, 1]")


# Oracle's 20%-deletion index-rebuild rule as a ready-made preset; epsilon
# mirrors alpha since no comparable convention exists for divergence.
INDEX_REBUILD = DriftThresholds(alpha=0.2, epsilon=0.2)

_OP_PARAMS = {
    "scale_cardinality": {"factor", "regenerate"},
    "update_cardinality": {"insert_count", "delete_fraction", "stratify_by"},
    "shift_distribution": {"target_skewness", "boost", "top_m"},
    "inject_outliers": {"values", "count", "k"},
}


@dataclass
class DriftSpec:
    op: str
    target_columns: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    thresholds: DriftThresholds | None = None

    def __post_init__(self):
        if self.op not in DATA_DRIFT_OPS:
            raise ValueError(f"unknown drift op {self.op!r}; expected one of {DATA_DRIFT_OPS}")
        unknown = set(self.params) - _OP_PARAMS[self.op]
        if unknown:
            raise ValueError(f"op {self.op!r} does not accept params {sorted(unknown)}")
        if self.op == "scale_cardinality":
            if float(self.params.get("factor", 1.0)) <= 0:
                raise ValueError("factor must be > 0")
        if self.op == "update_cardinality":
            f = float(self.params.get("delete_fraction", 0.0))
            if not 0 <= f < 1:
                raise ValueError("delete_fraction must be in [0, 1)")
            if int(self.params.get("insert_count", 0)) < 0:
                raise ValueError("insert_count must be >= 0")
        if self.op in ("shift_distribution", "inject_outliers") and not self.target_columns:
            raise ValueError(f"op {self.op!r} requires target_columns")

    @classmethod
    def from_dict(cls, d: dict) -> "DriftSpec":
        thresholds = None
        if d.get("thresholds"):
            thresholds = DriftThresholds(**d["thresholds"])
        return cls(
            op=d["op"],
            target_columns=list(d.get("target_columns", [])),
            params=dict(d.get("params", {})),
            thresholds=thresholds,
        )

    def to_dict(self) -> dict:
        out = {"op": self.op, "target_columns": list(self.target_columns), "params": dict(self.params)}
        if self.thresholds is not None:
            out["thresholds"] = {"alpha": self.thresholds.alpha, "epsilon": self.thresholds.epsilon}
        return out


@dataclass
class ChangeLog:
    inserted_row_indices: list
    deleted_row_indices: list
    op_applied: dict
    seed: int

    def to_dict(self) -> dict:
        return {
            "op_applied": self.op_applied,
            "seed": self.seed,
            "inserted_row_indices": list(self.inserted_row_indices),
            "deleted_row_indices": list(self.deleted_row_indices),
        }


def _empty_log(op: dict, seed: int) -> ChangeLog:
    return ChangeLog([], [], op, seed)


def scale_cardinality(
    table: Table,
    table_schema: TableSchema,
    factor: float,
    seed: int,
    regenerate: bool = False,
) -> Table:
    """Resize to round(factor * n) rows.

    factor < 1 subsamples uniformly without replacement (distribution-
    proportional in expectation); factor > 1 keeps the original rows and
    appends synthesized ones; factor == 1 with regenerate=True returns a
    fully synthesized same-size table.
    """
    return _scale(table, table_schema, factor, seed, regenerate)[0]


def _scale(table, table_schema, factor, seed, regenerate):
    if factor <= 0:
        raise ValueError("factor must be > 0")
    n = table.row_count
    target = int(round(factor * n))
    op = {"op": "scale_cardinality", "factor": factor, "regenerate": regenerate}
    if target == n and not regenerate:
        return table, _empty_log(op, seed)
    if regenerate:
        fresh = generate_rows(table_schema, target, seed)
        # inserted rows are indexed as if appended to the input, keeping
        # the two index sets disjoint
        return Table(table.name, fresh.columns), ChangeLog(list(range(n, n + target)), list(range(n)), op, seed)
    if target < n:
        rng = substream(seed, "scale", "subsample")
        keep = np.sort(rng.choice(n, size=target, replace=False))
        deleted = sorted(set(range(n)) - set(int(i) for i in keep))
        return table.take(keep), ChangeLog([], deleted, op, seed)
    extra = generate_rows(table_schema, target - n, seed)
    grown = table.concat(Table(table.name, extra.columns))
    return grown, ChangeLog(list(range(n, target)), [], op, seed)


def update_cardinality(
    table: Table,
    table_schema: TableSchema,
    insert_count: int,
    delete_fraction: float,
    seed: int,
    stratify_by: str | None = None,
) -> tuple[Table, ChangeLog]:
    """Delete a row sample and append synthesized insertions.

    Uniform deletion (the default) is exactly distribution-proportional in
    expectation, so per-column marginals are preserved. stratify_by targets
    deletions at the column's most frequent value instead (spilling into
    the remaining rows only when the stratum runs out), which deliberately
    biases the marginal for adversarial scenarios. Inserted rows are
    indexed as if appended to the input (n..n+k-1), keeping the two index
    sets disjoint.
    """
    if not 0 <= delete_fraction < 1:
        raise ValueError("delete_fraction must be in [0, 1)")
    if insert_count < 0:
        raise ValueError("insert_count must be >= 0")
    n = table.row_count
    op = {"op": "update_cardinality", "insert_count": insert_count, "delete_fraction": delete_fraction}
    if stratify_by is not None:
        op["stratify_by"] = stratify_by
    keep_count = math.floor((1.0 - delete_fraction) * n + 1e-9)
    delete_count = n - keep_count
    if delete_count == 0 and insert_count == 0:
        return table, _empty_log(op, seed)
    deleted: list[int] = []
    kept = table
    if delete_count > 0:
        rng = substream(seed, "update", "delete")
        if stratify_by is None:
            removed = rng.choice(n, size=delete_count, replace=False)
        else:
            values = table.column(stratify_by)
            counts: dict = {}
            for v in values:
                if v is not None:
                    counts[v] = counts.get(v, 0) + 1
            target = min(counts, key=lambda v: (-counts[v], v))
            stratum = np.array([i for i, v in enumerate(values) if v == target], dtype=np.int64)
            rest = np.array([i for i, v in enumerate(values) if v != target], dtype=np.int64)
            from_stratum = min(delete_count, len(stratum))
            removed = rng.choice(stratum, size=from_stratum, replace=False)
            if from_stratum < delete_count:
                spill = rng.choice(rest, size=delete_count - from_stratum, replace=False)
                removed = np.concatenate([removed, spill])
        removed_set = set(int(i) for i in removed)
        deleted = sorted(removed_set)
        kept = table.take([i for i in range(n) if i not in removed_set])
    inserted: list[int] = []
    if insert_count > 0:
        extra = generate_rows(table_schema, insert_count, seed)
        kept = kept.concat(Table(table.name, extra.columns))
        inserted = list(range(n, n + insert_count))
    return kept, ChangeLog(inserted, deleted, op, seed)


def _skew_normal_skewness(delta: float) -> float:
    b = math.sqrt(2 / math.pi)
    return (4 - math.pi) / 2 * (delta * b) ** 3 / (1 - 2 * delta * delta / math.pi) ** 1.5


def _solve_skew_shape(target: float) -> float:
    """delta in [0, 1) whose skew-normal skewness equals target (target >= 0)."""
    lo, hi = 0.0, 1.0 - 1e-12
    for _ in range(200):
        mid = (lo + hi) / 2
        if _skew_normal_skewness(mid) < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def _sample_skewness(values: np.ndarray) -> float:
    std = float(values.std())
    if std == 0:
        return 0.0
    return float((((values - values.mean()) / std) ** 3).mean())


def skew_numeric(table: Table, column: str, target_skewness: float, seed: int) -> Table:
    """Replace a numeric column with skew-normal draws re-standardized to the
    source mean and standard deviation (both preserved exactly, skewness
    pushed to the target)."""
    values = table.numeric_column(column)
    non_null = values[~np.isnan(values)]
    if len(np.unique(non_null)) < 2:
        raise ValueError(f"column {column!r} needs >= 2 distinct numeric values")
    if abs(target_skewness) >= SKEW_NORMAL_MAX_SKEW:
        raise ValueError(
            f"target skewness {target_skewness} is outside the skew-normal range "
            f"(|skew| < {SKEW_NORMAL_MAX_SKEW})"
        )
    mean = float(non_null.mean())
    std = float(non_null.std())
    n = table.row_count
    rng = substream(seed, "skew", column)
    sign = -1.0 if target_skewness < 0 else 1.0
    goal = abs(target_skewness)
    attempt_goal = goal
    draws = None
    for _ in range(5):
        delta = _solve_skew_shape(attempt_goal)
        u0 = rng.standard_normal(n)
        u1 = rng.standard_normal(n)
        draws = delta * np.abs(u0) + math.sqrt(1 - delta * delta) * u1
        if goal == 0 or _sample_skewness(draws) >= 0.9 * goal:
            break
        attempt_goal = min(attempt_goal * 1.05, SKEW_NORMAL_MAX_SKEW - 1e-6)
    draws = sign * draws
    standardized = mean + std * (draws - draws.mean()) / draws.std()
    # full float precision: exact moment preservation matters more than
    # matching the source's integer rendering here
    return table.with_column(column, [repr(float(v)) for v in standardized])


def skew_categorical(table: Table, column: str, boost: float, top_m: int, seed: int) -> Table:
    """Resample a categorical column with the top_m categories upweighted by boost."""
    if boost < 1:
        raise ValueError("boost must be >= 1")
    if top_m < 1:
        raise ValueError("top_m must be >= 1")
    values = table.column(column)
    if infer_logical_type(values) not in (LogicalType.CATEGORICAL, LogicalType.TEXT):
        raise ValueError(f"column {column!r} is not categorical")
    non_null = [v for v in values if v is not None]
    uniq, counts = np.unique(np.array(non_null, dtype=object), return_counts=True)
    order = np.lexsort((uniq, -counts))
    weights = counts[order].astype(np.float64)
    weights[:top_m] *= boost
    weights /= weights.sum()
    rng = substream(seed, "skew", column)
    idx = rng.choice(len(weights), size=table.row_count, p=weights)
    ranked_values = [str(uniq[i]) for i in order]
    return table.with_column(column, [ranked_values[i] for i in idx])


def inject_outliers(
    table: Table,
    column: str,
    outliers,
    seed: int,
    table_schema: TableSchema | None = None,
) -> Table:
    """Append one row per outlier value; non-target fields are synthesized.

    outliers is either an explicit value list or a rule {"count": k,
    "k": spread} drawing uniformly from [min - k*std, p1) + (p99, max + k*std].
    """
    return _inject(table, column, outliers, seed, table_schema)[0]


def _inject(table, column, outliers, seed, table_schema=None):
    if table_schema is None:
        table_schema = extract_schema(table)
    profile = table_schema.column(column)
    if not profile.is_numeric_like():
        raise ValueError(f"column {column!r} must be numeric or datetime for outlier injection")
    p1 = profile.percentile(0.01)
    p99 = profile.percentile(0.99)

    if isinstance(outliers, dict):
        count = int(outliers.get("count", 0))
        spread = float(outliers.get("k", 3.0))
        if count < 1:
            raise ValueError("outlier rule needs count >= 1")
        low_len = max(p1 - (profile.min - spread * profile.std), 0.0)
        high_len = max(profile.max + spread * profile.std - p99, 0.0)
        if low_len + high_len <= 0:
            raise ValueError("degenerate column: no room outside [p1, p99]")
        rng = substream(seed, "outliers", column, "rule")
        u = rng.uniform(0.0, low_len + high_len, size=count)
        # the high interval is open at p99; nudge exact hits off the boundary
        high = np.maximum(p99 + (u - low_len), np.nextafter(p99, np.inf))
        values = np.where(u < low_len, profile.min - spread * profile.std + u, high)
        if profile.integer_like:
            # round away from [p1, p99] so integer rendering stays outside
            values = np.where(u < low_len, np.floor(values), np.ceil(values))
    else:
        values = np.asarray(list(outliers), dtype=np.float64)
        if len(values) == 0:
            raise ValueError("outlier value list is empty")
        inside = [float(v) for v in values if p1 <= v <= p99]
        if inside:
            warnings.warn(
                f"outlier values {inside} fall inside [p1, p99] = [{p1}, {p99}] of column {column!r}",
                stacklevel=2,
            )

    extra = generate_rows(table_schema, len(values), seed)
    extra = extra.with_column(column, render_numeric(values, profile))
    n = table.row_count
    combined = table.concat(Table(table.name, extra.columns))
    op = {"op": "inject_outliers", "column": column, "count": len(values)}
    return combined, ChangeLog(list(range(n, n + len(values))), [], op, seed)


def apply_drift(
    table: Table,
    table_schema: TableSchema,
    specs: list[DriftSpec],
    seed: int,
) -> tuple[Table, list[ChangeLog]]:
    """Apply drift specs sequentially, re-profiling between steps so later
    operations see the drifted statistics."""
    if not specs:
        raise ValueError("drift spec list is empty")
    current = table
    current_schema = table_schema
    logs: list[ChangeLog] = []
    for step, spec in enumerate(specs):
        step_seed = seed + step
        try:
            current, log = _apply_one(current, current_schema, spec, step_seed)
        except (ValueError, KeyError) as exc:
            raise ValueError(f"drift step {step} ({spec.op}): {exc}") from exc
        logs.append(log)
        if step + 1 < len(specs):
            current_schema = extract_schema(current, current_schema.bucket_count)
    return current, logs


def _apply_one(table, table_schema, spec: DriftSpec, seed: int):
    if spec.op == "scale_cardinality":
        return _scale(
            table,
            table_schema,
            float(spec.params.get("factor", 1.0)),
            seed,
            bool(spec.params.get("regenerate", False)),
        )
    if spec.op == "update_cardinality":
        return update_cardinality(
            table,
            table_schema,
            int(spec.params.get("insert_count", 0)),
            float(spec.params.get("delete_fraction", 0.0)),
            seed,
            stratify_by=spec.params.get("stratify_by"),
        )
    if spec.op == "shift_distribution":
        current = table
        for col in spec.target_columns:
            profile = table_schema.column(col)
            if profile.is_numeric_like():
                current = skew_numeric(current, col, float(spec.params["target_skewness"]), seed)
            else:
                current = skew_categorical(
                    current, col, float(spec.params.get("boost", 2.0)), int(spec.params.get("top_m", 1)), seed
                )
        return current, _empty_log(spec.to_dict(), seed)
    if spec.op == "inject_outliers":
        current = table
        inserted: list[int] = []
        for col in spec.target_columns:
            outliers = spec.params.get("values")
            if outliers is None:
                outliers = {"count": int(spec.params.get("count", 0)), "k": float(spec.params.get("k", 3.0))}
            current, log = _inject(current, col, outliers, seed, table_schema)
            inserted.extend(log.inserted_row_indices)
        return current, ChangeLog(inserted, [], spec.to_dict(), seed)
    raise ValueError(f"unknown drift op {spec.op!r}")
