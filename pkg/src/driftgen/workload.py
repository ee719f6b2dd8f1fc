"""Workload instantiation: templates plus parameter distributions.

Range slots are bound to [center - width/2, center + width/2] intersected
with the column domain; centers come from uniform, normal, or Zipfian
samplers over the profiled column. Parametric drift is two phases of the
same template under different parameter distributions; selectivity drift
is a width schedule across timestamp groups.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import substream
from .schema import ColumnProfile, TableSchema
from .templates import QueryTemplate, render_sql

DISTRIBUTIONS = ("uniform", "normal", "zipfian")
# beyond this many distincts, zipfian ranks histogram bucket midpoints
ZIPF_DISTINCT_CAP = 1000


@dataclass
class ParamSamplerSpec:
    distribution: str
    params: dict = field(default_factory=dict)
    domain: tuple | None = None

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}; expected one of {DISTRIBUTIONS}")
        if self.distribution == "normal" and self.params.get("std") is not None and self.params["std"] <= 0:
            raise ValueError("normal std must be > 0")
        if self.distribution == "zipfian" and self.params.get("s") is not None and self.params["s"] <= 0:
            raise ValueError("zipfian exponent s must be > 0")
        if self.domain is not None and self.domain[0] > self.domain[1]:
            raise ValueError("domain low > high")

    @classmethod
    def from_dict(cls, d: dict) -> "ParamSamplerSpec":
        return cls(
            distribution=d["distribution"],
            params=dict(d.get("params", {})),
            domain=tuple(d["domain"]) if d.get("domain") else None,
        )


@dataclass
class CenterSampler:
    """Draws predicate centers for one range slot."""

    draw: callable
    domain: tuple


@dataclass
class ValueSampler:
    """Draws bound values for one equality slot."""

    draw: callable


@dataclass
class QueryInstance:
    template_id: str
    bindings: list
    sql: str
    tables: list
    joins: list = field(default_factory=list)
    timestamp: float | None = None
    group_id: int = 0
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "template_id": self.template_id,
            "group_id": self.group_id,
            "bindings": self.bindings,
            "timestamp": None if self.timestamp is None else round(self.timestamp, 3),
            "seed": self.seed,
            "tables": list(self.tables),
            "joins": list(self.joins),
            "sql": self.sql,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QueryInstance":
        return cls(
            template_id=d["template_id"],
            bindings=list(d["bindings"]),
            sql=d.get("sql", ""),
            tables=list(d.get("tables", [])),
            joins=list(d.get("joins", [])),
            timestamp=d.get("timestamp"),
            group_id=d.get("group_id", 0),
            seed=d.get("seed"),
        )


def make_center_sampler(profile: ColumnProfile, spec: ParamSamplerSpec) -> CenterSampler:
    """Center sampler over a numeric/datetime column's domain."""
    if not profile.is_numeric_like():
        raise ValueError(f"center sampler needs a numeric or datetime column, got {profile.name!r}")
    lo, hi = spec.domain if spec.domain is not None else (profile.min, profile.max)

    if spec.distribution == "uniform":
        return CenterSampler(draw=lambda n, rng: rng.uniform(lo, hi, size=n), domain=(lo, hi))

    if spec.distribution == "normal":
        mean = float(spec.params.get("mean", profile.mean))
        std = float(spec.params.get("std", profile.std))
        if std <= 0:
            raise ValueError("normal std must be > 0")
        return CenterSampler(
            draw=lambda n, rng: np.clip(rng.normal(mean, std, size=n), lo, hi), domain=(lo, hi)
        )

    s = float(spec.params.get("s", 1.5))
    if s <= 0:
        raise ValueError("zipfian exponent s must be > 0")
    if profile.distinct_count <= ZIPF_DISTINCT_CAP and profile.categories:
        # categories are already ranked by frequency desc
        support = np.array([v for v, _ in profile.categories], dtype=np.float64)
    else:
        bounds = np.asarray(profile.histogram_bounds, dtype=np.float64)
        support = (bounds[:-1] + bounds[1:]) / 2  # equal mass per bucket: rank by position
    ranks = np.arange(1, len(support) + 1, dtype=np.float64)
    probs = ranks**-s
    probs /= probs.sum()
    return CenterSampler(
        draw=lambda n, rng: support[rng.choice(len(support), size=n, p=probs)], domain=(lo, hi)
    )


def make_equality_sampler(profile: ColumnProfile) -> ValueSampler:
    """Frequency-weighted value sampler for an equality slot."""
    if not profile.categories:
        raise ValueError(f"column {profile.name!r} has no category table")
    values = [v for v, _ in profile.categories]
    weights = np.array([w for _, w in profile.categories], dtype=np.float64)
    weights /= weights.sum()
    return ValueSampler(draw=lambda n, rng: [values[i] for i in rng.choice(len(values), size=n, p=weights)])


def default_samplers(template: QueryTemplate, schemas, specs: dict | None = None):
    """(samplers, widths) for every slot: uniform centers and frequency-
    weighted equality values unless a ParamSamplerSpec overrides a column."""
    specs = specs or {}
    by_name = {s.table_name: s for s in schemas}
    samplers = []
    widths = []
    for slot in template.predicates:
        profile = by_name[slot.table].column(slot.column)
        if slot.kind == "range":
            spec = specs.get(slot.column, ParamSamplerSpec("uniform"))
            samplers.append(make_center_sampler(profile, spec))
            widths.append((profile.max - profile.min) / 10)
        else:
            samplers.append(make_equality_sampler(profile))
            widths.append(None)
    return samplers, widths


def instantiate(
    template: QueryTemplate,
    samplers: list,
    widths: list,
    n: int,
    seed: int,
    group_id: int = 0,
) -> list[QueryInstance]:
    """n concrete queries; deterministic given (seed, group_id)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    slots = template.predicates
    if len(samplers) != len(slots) or len(widths) != len(slots):
        raise ValueError(
            f"template {template.id} has {len(slots)} slots; got {len(samplers)} samplers / {len(widths)} widths"
        )
    rng = substream(seed, "instantiate", template.id, group_id)
    per_slot = []
    for slot, sampler, width in zip(slots, samplers, widths):
        if slot.kind == "range":
            if not isinstance(sampler, CenterSampler):
                raise ValueError(f"range slot {slot.column!r} needs a CenterSampler")
            if width is None or width <= 0:
                raise ValueError(f"range slot {slot.column!r} needs a positive width")
            centers = sampler.draw(n, rng)
            dlo, dhi = sampler.domain
            lows = np.maximum(centers - width / 2, dlo)
            highs = np.minimum(centers + width / 2, dhi)
            per_slot.append(("range", slot, lows, highs))
        else:
            if not isinstance(sampler, ValueSampler):
                raise ValueError(f"equality slot {slot.column!r} needs a ValueSampler")
            per_slot.append(("equality", slot, sampler.draw(n, rng), None))

    joins = [j.to_dict() for j in template.joins]
    instances = []
    for i in range(n):
        bindings = []
        slot_bindings = []
        for kind, slot, a, b in per_slot:
            if kind == "range":
                lo, hi = float(a[i]), float(b[i])
                bindings.append(
                    {"table": slot.table, "column": slot.column, "kind": "range", "low": lo, "high": hi}
                )
                slot_bindings.append((lo, hi))
            else:
                bindings.append(
                    {"table": slot.table, "column": slot.column, "kind": "equality", "value": a[i]}
                )
                slot_bindings.append(a[i])
        instances.append(
            QueryInstance(
                template_id=template.id,
                bindings=bindings,
                sql=render_sql(template, slot_bindings),
                tables=list(template.tables),
                joins=joins,
                group_id=group_id,
                seed=seed,
            )
        )
    return instances


def vary_selectivity(
    template: QueryTemplate,
    slot: int,
    width_schedule: tuple,
    per_group: int,
    samplers: list,
    seed: int,
) -> list[QueryInstance]:
    """Linearly widen one range slot across groups: group g gets width
    start + g * (end - start) / (groups - 1) and group_id = g."""
    start, end, groups = width_schedule
    if groups < 1:
        raise ValueError("groups must be >= 1")
    if start <= 0 or end <= 0:
        raise ValueError("widths must be positive")
    if template.predicates[slot].kind != "range":
        raise ValueError(f"slot {slot} is not a range slot")
    base_widths = [
        (s.domain[1] - s.domain[0]) if isinstance(s, CenterSampler) else None for s in samplers
    ]
    out = []
    for g in range(groups):
        width = start if groups == 1 else start + g * (end - start) / (groups - 1)
        widths = list(base_widths)
        widths[slot] = width
        out.extend(instantiate(template, samplers, widths, per_group, seed, group_id=g))
    return out


def drift_workload(
    template: QueryTemplate,
    table_schema: TableSchema,
    slot: int,
    base: ParamSamplerSpec,
    drifted: ParamSamplerSpec,
    width: float,
    n_per_phase: int,
    seed: int,
) -> tuple[list[QueryInstance], list[QueryInstance]]:
    """Two phases from the same template with different center distributions
    on one slot (other slots keep their defaults)."""
    target = template.predicates[slot]
    if target.kind != "range":
        raise ValueError(f"slot {slot} is not a range slot")
    phases = []
    for phase, spec in enumerate((base, drifted)):
        samplers, widths = default_samplers(template, [table_schema])
        samplers[slot] = make_center_sampler(table_schema.column(target.column), spec)
        widths[slot] = width
        phases.append(instantiate(template, samplers, widths, n_per_phase, seed, group_id=phase))
    return phases[0], phases[1]


def write_sql(instances, path) -> None:
    Path(path).write_text("".join(q.sql + "\n" for q in instances), encoding="utf-8")


def save_sidecar(instances, path) -> None:
    Path(path).write_text(
        json.dumps([q.to_dict() for q in instances], indent=2) + "\n", encoding="utf-8"
    )


def load_sidecar(path) -> list[QueryInstance]:
    return [QueryInstance.from_dict(d) for d in json.loads(Path(path).read_text(encoding="utf-8"))]
