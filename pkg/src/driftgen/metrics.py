"""Drift verification and the estimator harness.

Divergence is KS for numeric columns and total variation for categorical
ones. Truth comes from a brute-force full scan (hash-joined for
multi-table queries); the built-in estimator mirrors optimizer statistics:
equi-depth histogram with intra-bucket uniformity for ranges, most-common
values plus a uniform residual for equality.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .drift import DriftThresholds
from .schema import LogicalType, TableSchema
from .tabular import Table

DEFAULT_ALPHA = 0.2
DEFAULT_EPSILON = 0.2
JOIN_ROW_CAP = 1_000_000

REPORT_KINDS = (
    "cardinality",
    "distributional-global",
    "distributional-local",
    "parametric",
    "structural",
    "none",
)


@dataclass
class DriftReport:
    kind: str
    magnitude: float
    threshold_used: float
    per_column_divergence: dict = field(default_factory=dict)
    verdict: bool = False
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in REPORT_KINDS:
            raise ValueError(f"unknown report kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "magnitude": self.magnitude,
            "threshold_used": self.threshold_used,
            "per_column_divergence": dict(self.per_column_divergence),
            "verdict": self.verdict,
            "details": self.details,
        }


@dataclass
class SelectivityReport:
    per_query: list
    mean: float
    group_means: dict

    def to_dict(self) -> dict:
        return {
            "per_query": list(self.per_query),
            "mean": self.mean,
            "group_means": {str(k): v for k, v in self.group_means.items()},
        }


def ks_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic: sup |F_a - F_b|.

    Computed over integer counts (one final division), so small cases are
    exact rationals.
    """
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if len(a) == 0 or len(b) == 0:
        raise ValueError("ks_statistic needs non-empty samples")
    grid = np.concatenate([a, b])
    ca = np.searchsorted(a, grid, side="right").astype(np.int64)
    cb = np.searchsorted(b, grid, side="right").astype(np.int64)
    top = int(np.max(np.abs(ca * len(b) - cb * len(a))))
    return top / (len(a) * len(b))


def tv_distance(a: dict, b: dict) -> float:
    """Total variation between two normalized frequency maps."""
    for name, m in (("first", a), ("second", b)):
        total = sum(m.values())
        if m and abs(total - 1.0) > 1e-6:
            raise ValueError(f"{name} frequency map is unnormalized (sums to {total})")
    # sorted support: summation order must not depend on set iteration
    support = sorted(set(a) | set(b), key=repr)
    return 0.5 * sum(abs(a.get(v, 0.0) - b.get(v, 0.0)) for v in support)


def column_frequencies(table: Table, column: str) -> dict:
    """Non-null value frequencies of one column, normalized."""
    values = [v for v in table.column(column) if v is not None]
    n = len(values)
    return {v: c / n for v, c in Counter(values).items()}


def sample_skewness(values: np.ndarray) -> float:
    std = float(values.std())
    if std == 0:
        return 0.0
    return float((((values - values.mean()) / std) ** 3).mean())


def check_cardinality_drift(n1: int, n2: int, alpha: float) -> DriftReport:
    """Definition check: drift iff |n2 - n1| > alpha * n1 (strict)."""
    if n1 <= 0:
        raise ValueError("baseline row count must be positive")
    magnitude = abs(n2 - n1) / n1
    return DriftReport(
        kind="cardinality",
        magnitude=magnitude,
        threshold_used=alpha,
        per_column_divergence={},
        verdict=magnitude > alpha,
        details={"rows_before": n1, "rows_after": n2},
    )


def check_distributional_drift(d1: Table, d2: Table, table_schema: TableSchema, epsilon: float) -> DriftReport:
    """Per-column divergence (KS numeric, TV categorical); drift iff the max
    exceeds epsilon (strict). Skewness deltas are reported alongside."""
    if d1.column_names != d2.column_names:
        raise ValueError(
            f"schema mismatch: {d1.column_names} vs {d2.column_names}"
        )
    divergence: dict = {}
    skew_delta: dict = {}
    for profile in table_schema.columns:
        col = profile.name
        if profile.is_numeric_like():
            v1 = d1.numeric_column(col)
            v2 = d2.numeric_column(col)
            v1 = v1[~np.isnan(v1)]
            v2 = v2[~np.isnan(v2)]
            divergence[col] = ks_statistic(v1, v2)
            skew_delta[col] = sample_skewness(v2) - sample_skewness(v1)
        else:
            divergence[col] = tv_distance(column_frequencies(d1, col), column_frequencies(d2, col))
    magnitude = max(divergence.values())
    return DriftReport(
        kind="distributional-global",
        magnitude=magnitude,
        threshold_used=epsilon,
        per_column_divergence=divergence,
        verdict=magnitude > epsilon,
        details={"skewness_delta": skew_delta},
    )


def _joined_relation(tables: dict, instance) -> tuple[dict, int]:
    """Hash-join the instance's tables; returns per-table row-index arrays."""
    order = list(instance.tables)
    base = order[0]
    relation = {base: np.arange(tables[base].row_count, dtype=np.int64)}
    rows = tables[base].row_count
    for join in instance.joins:
        (lt, lc), (rt, rc) = tuple(join["left"]), tuple(join["right"])
        if lt in relation and rt not in relation:
            have_t, have_c, new_t, new_c = lt, lc, rt, rc
        elif rt in relation and lt not in relation:
            have_t, have_c, new_t, new_c = rt, rc, lt, lc
        else:
            raise ValueError(f"join {join} does not connect a new table")
        new_map: dict = {}
        for i, v in enumerate(tables[new_t].column(new_c)):
            if v is not None:
                new_map.setdefault(v, []).append(i)
        have_vals = tables[have_t].column(have_c)
        keep_pos: list[int] = []
        new_rows: list[int] = []
        for pos, row_idx in enumerate(relation[have_t]):
            v = have_vals[row_idx]
            if v is None:
                continue
            for r in new_map.get(v, ()):
                keep_pos.append(pos)
                new_rows.append(r)
        if len(keep_pos) > JOIN_ROW_CAP:
            raise ValueError(f"joined relation exceeds {JOIN_ROW_CAP} rows")
        keep = np.asarray(keep_pos, dtype=np.int64)
        relation = {t: idx[keep] for t, idx in relation.items()}
        relation[new_t] = np.asarray(new_rows, dtype=np.int64)
        rows = len(keep)
    return relation, rows


def true_selectivity(data, instance) -> float:
    """Exact fraction of rows of the (joined) relation satisfying every
    bound predicate; brute-force scan, no estimation anywhere."""
    if isinstance(data, Table):
        # single-table oracle: every predicate resolves against this table
        tables = None
        relation = {}
        single = data
        rows = data.row_count
    else:
        tables = dict(data)
        single = None
        if len(instance.tables) > 1:
            relation, rows = _joined_relation(tables, instance)
        else:
            t = instance.tables[0]
            relation = {}
            rows = tables[t].row_count
    if rows == 0:
        return 0.0

    range_cols, lows, highs = [], [], []
    eq_cols, eq_codes = [], []
    for binding in instance.bindings:
        if single is not None:
            table = single
            idx = None
        else:
            t = binding.get("table") or instance.tables[0]
            if t not in tables:
                raise KeyError(f"query references unknown table {t!r}")
            table = tables[t]
            idx = relation.get(t)
        if binding["kind"] == "range":
            arr = table.numeric_column(binding["column"])
            range_cols.append(arr if idx is None else arr[idx])
            lows.append(float(binding["low"]))
            highs.append(float(binding["high"]))
        else:
            codes, mapping = table.coded_column(binding["column"])
            eq_cols.append(codes if idx is None else codes[idx])
            eq_codes.append(mapping.get(binding["value"], -2))  # -2 matches nothing

    if not range_cols and not eq_cols:
        return 1.0
    rmat = np.ascontiguousarray(np.vstack(range_cols)) if range_cols else np.empty((0, rows))
    emat = (
        np.ascontiguousarray(np.vstack(eq_cols)).astype(np.int64)
        if eq_cols
        else np.empty((0, rows), dtype=np.int64)
    )
    count = kernels.predicate_count(
        rows,
        rmat,
        np.asarray(lows, dtype=np.float64),
        np.asarray(highs, dtype=np.float64),
        emat,
        np.asarray(eq_codes, dtype=np.int64),
    )
    return count / rows


def _range_fraction(bounds: list, lo: float, hi: float) -> float:
    """Mass of [lo, hi] under an equi-depth histogram with uniform buckets."""
    if hi < lo:
        return 0.0
    buckets = len(bounds) - 1
    full = 0
    partial = 0.0
    for i in range(buckets):
        b0, b1 = bounds[i], bounds[i + 1]
        if b1 < lo or b0 > hi:
            continue
        if lo <= b0 and b1 <= hi:
            full += 1
        elif b1 > b0:
            partial += (min(hi, b1) - max(lo, b0)) / (b1 - b0)
    return (full + partial) / buckets


def histogram_estimate(table_schema: TableSchema, instance) -> float:
    """Estimated matching rows from column statistics alone.

    Conjuncts combine by independence; ranges use the equi-depth
    histogram, equality uses most-common values with a uniform residual.
    """
    product = 1.0
    for binding in instance.bindings:
        profile = table_schema.column(binding["column"])
        if binding["kind"] == "range":
            if not profile.is_numeric_like():
                raise ValueError(f"range predicate on non-numeric column {profile.name!r}")
            sel = _range_fraction(profile.histogram_bounds, float(binding["low"]), float(binding["high"]))
        else:
            if profile.logical_type not in (LogicalType.CATEGORICAL, LogicalType.TEXT):
                raise ValueError(f"equality predicate on non-categorical column {profile.name!r}")
            value = binding["value"]
            sel = None
            for v, f in profile.top_k:
                if v == value:
                    sel = f
                    break
            if sel is None:
                covered = sum(f for _, f in profile.top_k)
                remaining = profile.distinct_count - len(profile.top_k)
                sel = max(1.0 - covered, 0.0) / remaining if remaining > 0 else 0.0
        product *= sel * (1.0 - profile.null_fraction)
    return table_schema.row_count * product


def q_error(estimate: float, truth: float) -> float:
    """Symmetric ratio max/min with both sides clamped at one row."""
    if estimate < 0 or truth < 0:
        raise ValueError("q_error inputs must be non-negative")
    e = max(float(estimate), 1.0)
    t = max(float(truth), 1.0)
    return max(e, t) / min(e, t)


def selectivity_report(data, instances) -> SelectivityReport:
    per_query = [true_selectivity(data, q) for q in instances]
    groups: dict = {}
    for q, s in zip(instances, per_query):
        groups.setdefault(q.group_id, []).append(s)
    return SelectivityReport(
        per_query=per_query,
        mean=float(np.mean(per_query)) if per_query else 0.0,
        group_means={g: float(np.mean(v)) for g, v in sorted(groups.items())},
    )


def _range_centers(instances) -> dict:
    centers: dict = {}
    for q in instances:
        for binding in q.bindings:
            if binding["kind"] != "range":
                continue
            key = binding["column"] if not binding.get("table") else f"{binding['table']}.{binding['column']}"
            centers.setdefault(key, []).append((float(binding["low"]) + float(binding["high"])) / 2)
    return centers


def verify_workload_drift(w1, w2, data, thresholds: DriftThresholds) -> DriftReport:
    """Classify drift between two workloads.

    Different templates mean structural drift. Same template: parametric
    drift if the per-slot KS over bound predicate centers exceeds epsilon,
    or the mean true selectivity moved by more than alpha relative to the
    first workload (whichever branch dominates is reported).
    """
    if not w1 or not w2:
        raise ValueError("workloads must be non-empty")
    ids1 = sorted({q.template_id for q in w1})
    ids2 = sorted({q.template_id for q in w2})
    if ids1 != ids2:
        return DriftReport(
            kind="structural",
            magnitude=1.0,
            threshold_used=0.0,
            per_column_divergence={},
            verdict=True,
            details={"templates_before": ids1, "templates_after": ids2},
        )

    centers1 = _range_centers(w1)
    centers2 = _range_centers(w2)
    divergence = {
        key: ks_statistic(centers1[key], centers2[key])
        for key in sorted(set(centers1) & set(centers2))
    }
    ks_max = max(divergence.values()) if divergence else 0.0

    sel1 = float(np.mean([true_selectivity(data, q) for q in w1]))
    sel2 = float(np.mean([true_selectivity(data, q) for q in w2]))
    sel_diff = abs(sel2 - sel1)
    sel_threshold = thresholds.alpha * sel1

    ks_ratio = ks_max / thresholds.epsilon
    sel_ratio = sel_diff / sel_threshold if sel_threshold > 0 else (np.inf if sel_diff > 0 else 0.0)
    if ks_ratio >= sel_ratio:
        magnitude, threshold = ks_max, thresholds.epsilon
    else:
        magnitude, threshold = sel_diff, sel_threshold
    verdict = magnitude > threshold
    return DriftReport(
        kind="parametric" if verdict else "none",
        magnitude=magnitude,
        threshold_used=threshold,
        per_column_divergence=divergence,
        verdict=verdict,
        details={
            "mean_selectivity_before": sel1,
            "mean_selectivity_after": sel2,
            "ks_max": ks_max,
            "selectivity_diff": sel_diff,
        },
    )
