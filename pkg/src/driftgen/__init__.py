"""driftgen: controlled data and query-workload drift for benchmarking.

Profile a tabular dataset, synthesize drifted versions of it (cardinality,
updates, distribution skew, outliers), generate parameterized query
workloads whose predicates drift over time, stamp them with temporal
arrival patterns, and verify everything against brute-force oracles.
"""

__version__ = "0.1.0"

from .drift import DriftSpec, DriftThresholds, apply_drift
from .generate import generate_child_table, generate_rows
from .metrics import (
    check_cardinality_drift,
    check_distributional_drift,
    histogram_estimate,
    ks_statistic,
    q_error,
    true_selectivity,
    tv_distance,
    verify_workload_drift,
)
from .schema import LogicalType, TableSchema, extract_schema
from .tabular import SourceDescriptor, Table, open_source, write_table
from .templates import generate_templates, infer_join_candidates, mutate_template, render_sql
from .timestamps import TemporalPattern, attach, gen_timestamps
from .workload import ParamSamplerSpec, QueryInstance, instantiate, vary_selectivity

__all__ = [
    "__version__",
    "DriftSpec",
    "DriftThresholds",
    "apply_drift",
    "generate_child_table",
    "generate_rows",
    "check_cardinality_drift",
    "check_distributional_drift",
    "histogram_estimate",
    "ks_statistic",
    "q_error",
    "true_selectivity",
    "tv_distance",
    "verify_workload_drift",
    "LogicalType",
    "TableSchema",
    "extract_schema",
    "SourceDescriptor",
    "Table",
    "open_source",
    "write_table",
    "generate_templates",
    "infer_join_candidates",
    "mutate_template",
    "render_sql",
    "TemporalPattern",
    "attach",
    "gen_timestamps",
    "ParamSamplerSpec",
    "QueryInstance",
    "instantiate",
    "vary_selectivity",
]
