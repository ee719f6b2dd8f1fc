"""Row synthesis from column statistics.

Numeric columns are drawn from a Gaussian-kernel KDE (mixture view: pick a
training point, add bandwidth-scaled noise, clip to the observed range);
categorical and text columns are frequency-sampled from the profiled
distribution. Child tables draw their foreign-key column from the parent's
key set so joins lose no rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .rng import as_generator, substream
from .schema import ColumnProfile, LogicalType, TableSchema
from .tabular import Table, format_datetime

TRAINING_CAP = 10_000


@dataclass
class NumericSampler:
    training_points: np.ndarray
    bandwidth: float
    clip_range: tuple

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.clip_range[0] > self.clip_range[1]:
            raise ValueError("clip_range low > high")


@dataclass
class CategoricalSampler:
    categories: list  # (value, weight), weights normalized here

    def __post_init__(self):
        if not self.categories:
            raise ValueError("need at least one category")
        total = float(sum(w for _, w in self.categories))
        if total <= 0:
            raise ValueError("category weights must be positive")
        self.categories = [(v, w / total) for v, w in self.categories]


@dataclass
class ForeignKeySpec:
    child_column: str
    parent_table: str
    parent_column: str


def silverman_bandwidth(values: np.ndarray) -> float:
    """0.9 * min(std, IQR/1.34) * n^(-1/5), with a tiny floor for constant data."""
    n = len(values)
    std = float(values.std(ddof=1))
    q25, q75 = np.percentile(values, [25, 75])
    h = 0.9 * min(std, (q75 - q25) / 1.34) * n ** (-1 / 5)
    if h <= 0:
        h = 1e-6 * max(1.0, abs(float(values.mean())))
    return float(h)


def fit_numeric(values, cap: int = TRAINING_CAP, seed: int = 0) -> NumericSampler:
    """KDE sampler over the given numeric values (subsampled down to cap)."""
    nums = np.asarray(values, dtype=np.float64)
    if len(nums) < 2:
        raise ValueError("need >= 2 non-null values to fit a numeric sampler")
    bandwidth = silverman_bandwidth(nums)
    if len(nums) > cap:
        rng = as_generator(seed)
        nums = nums[rng.choice(len(nums), size=cap, replace=False)]
    return NumericSampler(
        training_points=np.ascontiguousarray(nums),
        bandwidth=bandwidth,
        clip_range=(float(np.min(values)), float(np.max(values))),
    )


def numeric_sampler_from_profile(profile: ColumnProfile) -> NumericSampler:
    if not profile.kde_sample:
        raise ValueError(f"column {profile.name!r} has no numeric sample; re-profile the source")
    points = np.ascontiguousarray(profile.kde_sample, dtype=np.float64)
    return NumericSampler(
        training_points=points,
        bandwidth=silverman_bandwidth(points),
        clip_range=(profile.min, profile.max),
    )


def categorical_sampler_from_profile(profile: ColumnProfile) -> CategoricalSampler:
    if not profile.categories:
        raise ValueError(f"column {profile.name!r} has no category table; re-profile the source")
    return CategoricalSampler(categories=list(profile.categories))


def sample_numeric(sampler: NumericSampler, n: int, seed) -> np.ndarray:
    """n KDE draws; deterministic given the seed."""
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = as_generator(seed)
    idx = rng.integers(0, len(sampler.training_points), size=n)
    noise = rng.standard_normal(n)
    return kernels.mixture_sample(
        sampler.training_points,
        idx.astype(np.int64),
        noise,
        sampler.bandwidth,
        sampler.clip_range[0],
        sampler.clip_range[1],
    )


def sample_categorical(sampler: CategoricalSampler, n: int, seed) -> list:
    """n i.i.d. frequency-weighted draws; deterministic given the seed."""
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = as_generator(seed)
    weights = np.array([w for _, w in sampler.categories], dtype=np.float64)
    weights /= weights.sum()
    idx = rng.choice(len(weights), size=n, p=weights)
    values = [v for v, _ in sampler.categories]
    return [values[i] for i in idx]


def render_numeric(values: np.ndarray, profile: ColumnProfile) -> list:
    """Draws back to cell strings, honoring the source's integer/datetime shape."""
    if profile.logical_type == LogicalType.DATETIME:
        fmt = profile.datetime_format or "%Y-%m-%d"
        return [format_datetime(v, fmt) for v in values]
    if profile.integer_like:
        return [str(int(round(float(v)))) for v in values]
    return [repr(float(v)) for v in values]


def _inject_nulls(cells: list, null_fraction: float, rng: np.random.Generator) -> list:
    k = int(round(null_fraction * len(cells)))
    if k <= 0:
        return cells
    positions = rng.choice(len(cells), size=k, replace=False)
    for i in positions:
        cells[i] = None
    return cells


def generate_column(profile: ColumnProfile, n: int, rng: np.random.Generator) -> list:
    if profile.is_numeric_like():
        sampler = numeric_sampler_from_profile(profile)
        cells = render_numeric(sample_numeric(sampler, n, rng), profile)
    else:
        sampler = categorical_sampler_from_profile(profile)
        cells = list(sample_categorical(sampler, n, rng))
    return _inject_nulls(cells, profile.null_fraction, rng)


def generate_rows(table_schema: TableSchema, n: int, seed: int) -> Table:
    """Synthesize n rows; columns are generated independently from their profiles.

    Each column uses its own RNG substream keyed by (seed, table, column),
    so per-column generation order cannot change the output.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    columns = []
    for profile in table_schema.columns:
        rng = substream(seed, "datagen", table_schema.table_name, profile.name)
        columns.append((profile.name, generate_column(profile, n, rng)))
    return Table(table_schema.table_name, columns)


def generate_child_table(
    parent: Table,
    child_schema: TableSchema,
    fk: ForeignKeySpec,
    n: int,
    seed: int,
    weighted: bool = False,
) -> Table:
    """Child rows whose fk column only holds values present in the parent.

    Keys are drawn uniformly over the parent's distinct key set by default;
    weighted=True follows the parent's key frequencies instead.
    """
    parent_values = [v for v in parent.column(fk.parent_column) if v is not None]
    if not parent_values:
        raise ValueError(f"parent column {fk.parent_column!r} has no non-null keys")
    keys, counts = np.unique(np.array(parent_values, dtype=object), return_counts=True)
    rng = substream(seed, "datagen", child_schema.table_name, fk.child_column)
    if weighted:
        p = counts / counts.sum()
        idx = rng.choice(len(keys), size=n, p=p)
    else:
        idx = rng.integers(0, len(keys), size=n)
    fk_cells = [str(keys[i]) for i in idx]

    columns = []
    for profile in child_schema.columns:
        if profile.name == fk.child_column:
            columns.append((profile.name, fk_cells))
            continue
        col_rng = substream(seed, "datagen", child_schema.table_name, profile.name)
        columns.append((profile.name, generate_column(profile, n, col_rng)))
    return Table(child_schema.table_name, columns)
