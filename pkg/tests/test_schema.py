import numpy as np
import pytest

from driftgen.schema import (
    LogicalType,
    TableSchema,
    equi_depth_bounds,
    extract_schema,
    infer_logical_type,
    profile_column,
)
from driftgen.tabular import Table


def test_infer_numeric():
    assert infer_logical_type(["18", "25", "90"]) == LogicalType.NUMERIC


def test_infer_datetime():
    assert infer_logical_type(["2020-01-01", "2020-02-01"]) == LogicalType.DATETIME


def test_infer_categorical_by_distinct_rule():
    values = (["Private", "Self-emp", "Gov", "Army", "None"] * 200)[:1000]
    assert len(set(values)) == 5
    assert infer_logical_type(values) == LogicalType.CATEGORICAL


def test_infer_text_when_high_cardinality():
    values = [f"user_{i}@example.com" for i in range(4000)]
    assert infer_logical_type(values) == LogicalType.TEXT


def test_infer_99_percent_rule():
    values = ["1"] * 99 + ["oops"]
    assert infer_logical_type(values) == LogicalType.NUMERIC
    values = ["1"] * 98 + ["oops", "oops"]
    assert infer_logical_type(values) != LogicalType.NUMERIC


def test_infer_all_null_errors():
    with pytest.raises(ValueError, match="untypeable"):
        infer_logical_type([None, None])


def test_quartile_bounds_1_to_100():
    values = [str(v) for v in range(1, 101)]
    p = profile_column(values, LogicalType.NUMERIC, bucket_count=4)
    assert p.histogram_bounds == [1, 25, 50, 75, 100]


def test_constant_column_conventions():
    p = profile_column(["5", "5", "5", "5"], LogicalType.NUMERIC)
    assert p.std == 0
    assert p.skewness == 0
    assert p.min == p.max == 5


def test_tiny_column_stats():
    p = profile_column(["1", "2", "3"], LogicalType.NUMERIC)
    assert p.min == 1 and p.max == 3 and p.mean == 2
    assert p.percentile(0.5) == 2


def test_single_value_numeric_errors():
    with pytest.raises(ValueError, match="2 non-null"):
        profile_column(["5", None], LogicalType.NUMERIC)


def test_equi_depth_occupancy():
    rng = np.random.default_rng(3)
    for n, buckets in [(100, 4), (103, 7), (57, 10), (1000, 33)]:
        values = np.sort(rng.permutation(n * 10)[:n]).astype(np.float64)  # distinct
        bounds = equi_depth_bounds(values, buckets)
        assert bounds[0] <= values[0] and bounds[-1] >= values[-1]
        lo, hi = n // buckets, -(-n // buckets)
        for i in range(buckets):
            left = bounds[i]
            count = np.sum((values > left) & (values <= bounds[i + 1]))
            if i == 0:
                count += np.sum(values == left)
            assert lo <= count <= hi, (n, buckets, i)


def test_percentiles_monotonic(census_schema):
    for profile in census_schema.columns:
        if not profile.is_numeric_like():
            continue
        ps = [v for _, v in profile.percentiles]
        assert ps == sorted(ps)
        assert profile.histogram_bounds == sorted(profile.histogram_bounds)
        assert profile.histogram_bounds[0] <= profile.min
        assert profile.histogram_bounds[-1] >= profile.max


def test_profile_deterministic(census_table):
    s1 = extract_schema(census_table)
    s2 = extract_schema(census_table)
    assert s1.to_dict() == s2.to_dict()


def test_extract_schema_order_and_types(census_table, census_schema):
    assert census_schema.column_names == census_table.column_names
    assert census_schema.column("age").logical_type == LogicalType.NUMERIC
    assert census_schema.column("workclass").logical_type == LogicalType.CATEGORICAL
    assert census_schema.column("signup_date").logical_type == LogicalType.DATETIME
    assert census_schema.column("age").integer_like
    assert not census_schema.column("capital_gain").integer_like


def test_all_null_column_names_the_column():
    t = Table("t", [("ok", ["1", "2"]), ("bad", [None, None])])
    with pytest.raises(ValueError, match="'bad'"):
        extract_schema(t)


def test_empty_table_errors():
    with pytest.raises(ValueError, match="empty"):
        extract_schema(Table("t", [("a", [])]))


def test_top_k_descending_and_bounded(census_schema):
    p = census_schema.column("workclass")
    freqs = [f for _, f in p.top_k]
    assert freqs == sorted(freqs, reverse=True)
    assert sum(freqs) <= 1 + 1e-9
    assert p.distinct_count == 7
    assert len(p.sample_values) <= 10


def test_null_fraction(census_schema):
    p = census_schema.column("occupation")
    assert 0.015 <= p.null_fraction <= 0.025
    # category frequencies are over non-null rows
    assert abs(sum(f for _, f in p.categories) - 1.0) < 1e-9


def test_schema_json_round_trip(census_schema):
    text = census_schema.to_json()
    back = TableSchema.from_json(text)
    assert back.to_dict() == census_schema.to_dict()
    assert back.to_json() == text


def test_kde_sample_is_capped_and_sorted(census_schema):
    p = census_schema.column("age")
    assert len(p.kde_sample) <= 10_000
    assert p.kde_sample == sorted(p.kde_sample)
