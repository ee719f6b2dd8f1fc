"""Parameterized query templates.

A template fixes the query structure (tables, projected payload, predicate
slots, optional joins); parameter values are bound later by the workload
generator. Join candidates between tables are inferred from column-name
similarity (SequenceMatcher ratio) plus logical-type compatibility.
Template ids are content hashes, so structural equality is id equality.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from difflib import SequenceMatcher
from pathlib import Path

import numpy as np

from .rng import substream
from .schema import LogicalType
from .tabular import format_datetime

DEFAULT_SIMILARITY_THRESHOLD = 0.8

DEFAULT_CONSTRAINTS = {
    "max_predicates": 5,
    "max_payload": 6,
    "join_probability": 0.0,
    "similarity_threshold": DEFAULT_SIMILARITY_THRESHOLD,
    "max_tables": 2,
}


@dataclass
class PredicateSlot:
    table: str
    column: str
    kind: str  # "range" | "equality"
    datetime_format: str | None = None

    def to_dict(self) -> dict:
        out = {"table": self.table, "column": self.column, "kind": self.kind}
        if self.datetime_format:
            out["datetime_format"] = self.datetime_format
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "PredicateSlot":
        return cls(
            table=d["table"],
            column=d["column"],
            kind=d["kind"],
            datetime_format=d.get("datetime_format"),
        )


@dataclass
class JoinEdge:
    left: tuple  # (table, column)
    right: tuple
    similarity: float

    def to_dict(self) -> dict:
        return {"left": list(self.left), "right": list(self.right), "similarity": self.similarity}

    @classmethod
    def from_dict(cls, d: dict) -> "JoinEdge":
        return cls(left=tuple(d["left"]), right=tuple(d["right"]), similarity=d["similarity"])


@dataclass
class QueryTemplate:
    id: str
    tables: list
    payload: list  # (table, column) pairs
    predicates: list  # PredicateSlot
    joins: list  # JoinEdge
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "tables": list(self.tables),
            "payload": [list(p) for p in self.payload],
            "predicates": [p.to_dict() for p in self.predicates],
            "joins": [j.to_dict() for j in self.joins],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QueryTemplate":
        return cls(
            id=d["id"],
            tables=list(d["tables"]),
            payload=[tuple(p) for p in d["payload"]],
            predicates=[PredicateSlot.from_dict(p) for p in d["predicates"]],
            joins=[JoinEdge.from_dict(j) for j in d["joins"]],
            warnings=list(d.get("warnings", [])),
        )


def structural_id(tables, payload, predicates, joins) -> str:
    canon = json.dumps(
        {
            "tables": list(tables),
            "payload": [list(p) for p in payload],
            "predicates": [[p.table, p.column, p.kind] for p in predicates],
            "joins": [[list(j.left), list(j.right)] for j in joins],
        },
        sort_keys=True,
    )
    return "t" + hashlib.sha1(canon.encode()).hexdigest()[:12]


def make_template(tables, payload, predicates, joins, warnings=()) -> QueryTemplate:
    return QueryTemplate(
        id=structural_id(tables, payload, predicates, joins),
        tables=list(tables),
        payload=list(payload),
        predicates=list(predicates),
        joins=list(joins),
        warnings=list(warnings),
    )


def name_similarity(a: str, b: str) -> float:
    """SequenceMatcher ratio in canonical (sorted) argument order, so the
    candidate set does not depend on schema order."""
    if a == b:
        return 1.0
    x, y = sorted((a, b))
    return SequenceMatcher(None, x, y).ratio()


def infer_join_candidates(schemas, threshold: float = DEFAULT_SIMILARITY_THRESHOLD) -> list[JoinEdge]:
    """Cross-table column pairs with similar names and identical logical type,
    sorted by similarity descending."""
    if len(schemas) < 2:
        raise ValueError("join inference needs at least two schemas")
    edges = []
    for i, s1 in enumerate(schemas):
        for s2 in schemas[i + 1 :]:
            for c1 in s1.columns:
                for c2 in s2.columns:
                    if c1.logical_type != c2.logical_type:
                        continue
                    sim = name_similarity(c1.name, c2.name)
                    if sim >= threshold:
                        edges.append(
                            JoinEdge(left=(s1.table_name, c1.name), right=(s2.table_name, c2.name), similarity=sim)
                        )
    edges.sort(key=lambda e: (-e.similarity, e.left, e.right))
    return edges


def _eligible_predicates(schemas_by_name, tables) -> list[PredicateSlot]:
    slots = []
    for t in tables:
        for profile in schemas_by_name[t].columns:
            if profile.is_numeric_like():
                slots.append(PredicateSlot(t, profile.name, "range", profile.datetime_format))
            elif profile.logical_type == LogicalType.CATEGORICAL:
                slots.append(PredicateSlot(t, profile.name, "equality"))
    return slots


def _all_columns(schemas_by_name, tables) -> list[tuple]:
    return [(t, c.name) for t in tables for c in schemas_by_name[t].columns]


def generate_templates(schemas, constraints: dict, count: int, seed: int) -> list[QueryTemplate]:
    """Sample `count` templates within the given structural constraints."""
    cfg = dict(DEFAULT_CONSTRAINTS)
    cfg.update(constraints or {})
    unknown = set(cfg) - set(DEFAULT_CONSTRAINTS)
    if unknown:
        raise ValueError(f"unknown template constraints {sorted(unknown)}")
    schemas = list(schemas)
    schemas_by_name = {s.table_name: s for s in schemas}
    candidates = (
        infer_join_candidates(schemas, cfg["similarity_threshold"]) if len(schemas) > 1 else []
    )

    out = []
    for i in range(count):
        rng = substream(seed, "template", i)
        warnings = []
        joins: list[JoinEdge] = []
        base = schemas[int(rng.integers(0, len(schemas)))].table_name
        tables = [base]
        if len(schemas) > 1 and rng.random() < cfg["join_probability"]:
            if not candidates:
                warnings.append("join requested but no candidates; single-table fallback")
            else:
                edge = candidates[int(rng.integers(0, len(candidates)))]
                tables = [edge.left[0], edge.right[0]]
                joins = [edge]
                while len(tables) < cfg["max_tables"]:
                    extension = next(
                        (
                            e
                            for e in candidates
                            if (e.left[0] in tables) != (e.right[0] in tables)
                        ),
                        None,
                    )
                    if extension is None:
                        break
                    joins.append(extension)
                    tables.append(
                        extension.right[0] if extension.left[0] in tables else extension.left[0]
                    )

        eligible = _eligible_predicates(schemas_by_name, tables)
        want = int(rng.integers(1, cfg["max_predicates"] + 1))
        take = min(want, len(eligible))
        predicates = [eligible[j] for j in sorted(rng.choice(len(eligible), size=take, replace=False))]

        columns = _all_columns(schemas_by_name, tables)
        want_payload = int(rng.integers(1, cfg["max_payload"] + 1))
        take_payload = min(want_payload, len(columns))
        payload = [columns[j] for j in sorted(rng.choice(len(columns), size=take_payload, replace=False))]

        out.append(make_template(tables, payload, predicates, joins, warnings))
    return out


def mutate_template(template: QueryTemplate, mutation: dict, seed: int, schemas=None) -> QueryTemplate:
    """Structural edit: drop/add predicate slots, replace the payload, or
    toggle the join. Returns a new template (new structural id)."""
    allowed = {"drop_predicates", "add_predicates", "set_payload", "toggle_join", "join_candidates"}
    unknown = set(mutation) - allowed
    if unknown:
        raise ValueError(f"unknown mutations {sorted(unknown)}")
    rng = substream(seed, "mutate", template.id)
    tables = list(template.tables)
    payload = list(template.payload)
    predicates = list(template.predicates)
    joins = list(template.joins)

    drop = int(mutation.get("drop_predicates", 0))
    if drop > 0 and predicates:
        keep = max(len(predicates) - drop, 0)  # 0 predicates = full scan
        idx = sorted(rng.choice(len(predicates), size=keep, replace=False))
        predicates = [predicates[i] for i in idx]

    add = int(mutation.get("add_predicates", 0))
    if add > 0:
        if schemas is None:
            raise ValueError("add_predicates requires schemas")
        schemas_by_name = {s.table_name: s for s in schemas}
        used = {(p.table, p.column) for p in predicates}
        unused = [s for s in _eligible_predicates(schemas_by_name, tables) if (s.table, s.column) not in used]
        if len(unused) < add:
            raise ValueError(f"cannot add {add} predicates; only {len(unused)} unused columns remain")
        idx = sorted(rng.choice(len(unused), size=add, replace=False))
        predicates = predicates + [unused[i] for i in idx]

    if "set_payload" in mutation:
        payload = [tuple(p) if not isinstance(p, str) else (tables[0], p) for p in mutation["set_payload"]]
        if not payload:
            raise ValueError("payload cannot be empty")

    if mutation.get("toggle_join"):
        if joins:
            keep_table = tables[0]
            tables = [keep_table]
            joins = []
            predicates = [p for p in predicates if p.table == keep_table]
            payload = [p for p in payload if p[0] == keep_table]
            if not payload:
                if schemas is None:
                    raise ValueError("toggle_join emptied the payload and no schemas were given")
                schemas_by_name = {s.table_name: s for s in schemas}
                payload = [(keep_table, schemas_by_name[keep_table].columns[0].name)]
        else:
            candidates = mutation.get("join_candidates")
            if not candidates and schemas is not None and len(schemas) > 1:
                candidates = infer_join_candidates(schemas)
            candidates = [c for c in (candidates or []) if c.left[0] == tables[0] or c.right[0] == tables[0]]
            if not candidates:
                raise ValueError("toggle_join on a single-table template needs join candidates")
            edge = candidates[0]
            other = edge.right[0] if edge.left[0] == tables[0] else edge.left[0]
            tables = tables + [other]
            joins = [edge]

    return make_template(tables, payload, predicates, joins, template.warnings)


def column_universe(schemas) -> list[str]:
    return sorted(f"{s.table_name}.{c.name}" for s in schemas for c in s.columns)


def template_features(template: QueryTemplate, universe=None) -> np.ndarray:
    """Numeric structure vector: [predicates, joins, payload, tables,
    range slots, equality slots] plus a one-hot of predicate columns over
    the given column universe (template-local universe when omitted)."""
    base = [
        len(template.predicates),
        len(template.joins),
        len(template.payload),
        len(template.tables),
        sum(1 for p in template.predicates if p.kind == "range"),
        sum(1 for p in template.predicates if p.kind == "equality"),
    ]
    if universe is None:
        universe = sorted({f"{p.table}.{p.column}" for p in template.predicates})
    used = {f"{p.table}.{p.column}" for p in template.predicates}
    onehot = [1.0 if name in used else 0.0 for name in universe]
    return np.asarray(base + onehot, dtype=np.float64)


def _format_value(v) -> str:
    if isinstance(v, str):
        return "'" + v.replace("'", "''") + "'"
    f = float(v)
    if f.is_integer():
        return str(int(f))
    return repr(f)


def _format_bound(v, slot: PredicateSlot) -> str:
    if slot.datetime_format:
        return "'" + format_datetime(float(v), slot.datetime_format) + "'"
    return _format_value(float(v))


def _qualify(table: str, column: str, qualified: bool) -> str:
    return f"{table}.{column}" if qualified else column


def render_sql(template: QueryTemplate, bindings) -> str:
    """Deterministic ANSI text for a fully bound template.

    bindings is aligned with template.predicates: (low, high) tuples for
    range slots, a single value for equality slots.
    """
    if bindings is None or len(bindings) != len(template.predicates):
        raise ValueError(
            f"template {template.id} has {len(template.predicates)} slots; "
            f"got {0 if bindings is None else len(bindings)} bindings"
        )
    qualified = len(template.tables) > 1
    select = ", ".join(_qualify(t, c, qualified) for t, c in template.payload)
    sql = f"SELECT {select} FROM {template.tables[0]}"
    joined = {template.tables[0]}
    for edge in template.joins:
        (lt, lc), (rt, rc) = edge.left, edge.right
        if lt in joined:
            new_t, on = rt, f"{lt}.{lc} = {rt}.{rc}"
        else:
            new_t, on = lt, f"{rt}.{rc} = {lt}.{lc}"
        sql += f" JOIN {new_t} ON {on}"
        joined.add(new_t)
    conjuncts = []
    for slot, binding in zip(template.predicates, bindings):
        if binding is None:
            raise ValueError(f"unbound predicate slot {slot.table}.{slot.column}")
        name = _qualify(slot.table, slot.column, qualified)
        if slot.kind == "range":
            lo, hi = binding
            conjuncts.append(f"{name} BETWEEN {_format_bound(lo, slot)} AND {_format_bound(hi, slot)}")
        else:
            conjuncts.append(f"{name} = {_format_value(binding)}")
    if conjuncts:
        sql += " WHERE " + " AND ".join(conjuncts)
    return sql


def save_templates(templates, path) -> None:
    Path(path).write_text(
        json.dumps([t.to_dict() for t in templates], indent=2) + "\n", encoding="utf-8"
    )


def load_templates(path) -> list[QueryTemplate]:
    return [QueryTemplate.from_dict(d) for d in json.loads(Path(path).read_text(encoding="utf-8"))]
