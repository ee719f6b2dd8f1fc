"""Command-line pipeline: profile -> drift -> generate -> verify.

One JSON scenario config drives everything; all randomness flows from a
single master seed through named substreams, and every run writes a
manifest with content digests so identical (config, seed) pairs produce
byte-identical output trees. Drift verdicts are reported as data, never as
failures: nonzero exits mean bad input, not detected drift.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .drift import DriftSpec, DriftThresholds, apply_drift
from .generate import generate_rows
from .metrics import (
    DEFAULT_ALPHA,
    DEFAULT_EPSILON,
    DriftReport,
    check_cardinality_drift,
    check_distributional_drift,
    histogram_estimate,
    q_error,
    selectivity_report,
    true_selectivity,
    verify_workload_drift,
)
from .rng import substream
from .schema import DEFAULT_BUCKET_COUNT, TableSchema, extract_schema
from .tabular import SourceDescriptor, Table, open_source, write_table
from .templates import (
    column_universe,
    generate_templates,
    load_templates,
    save_templates,
    template_features,
)
from .timestamps import TemporalPattern, attach, gen_timestamps
from .workload import (
    ParamSamplerSpec,
    default_samplers,
    instantiate,
    load_sidecar,
    save_sidecar,
    vary_selectivity,
    write_sql,
)


class ConfigError(ValueError):
    pass


def _load_config(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")


def _config_digest(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _out_dir(args, config) -> Path:
    out = args.out or (config or {}).get("outputs") or "."
    out = Path(out)
    for sub in ("data", "workload", "reports"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    return out


def _update_manifest(out: Path, config, seed, written, step_seeds=None) -> None:
    manifest_path = out / "manifest.json"
    manifest = {}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    manifest["tool_version"] = __version__
    manifest["seed"] = seed
    if config is not None:
        manifest["config_digest"] = _config_digest(config)
    files = {f["path"]: f for f in manifest.get("output_files", [])}
    for path in written:
        rel = str(Path(path).relative_to(out))
        files[rel] = {"path": rel, "sha256": _sha256(Path(path))}
    manifest["output_files"] = [files[k] for k in sorted(files)]
    seeds = manifest.get("per_step_seeds", {})
    seeds.update(step_seeds or {})
    manifest["per_step_seeds"] = seeds
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _source_from(args, config) -> SourceDescriptor:
    if getattr(args, "source", None):
        return SourceDescriptor(kind="csv", location=args.source)
    if config and "source" in config:
        return SourceDescriptor.from_dict(config["source"])
    raise ConfigError("no source given: pass a CSV path or a config with a 'source' entry")


def _seed_from(args, config) -> int:
    if args.seed is not None:
        return args.seed
    return int((config or {}).get("seed", 0))


def _thresholds_from(args, config) -> DriftThresholds:
    conf = (config or {}).get("thresholds", {})
    alpha = getattr(args, "alpha", None)
    epsilon = getattr(args, "epsilon", None)
    return DriftThresholds(
        alpha=alpha if alpha is not None else float(conf.get("alpha", DEFAULT_ALPHA)),
        epsilon=epsilon if epsilon is not None else float(conf.get("epsilon", DEFAULT_EPSILON)),
    )


def _bucket_count(config) -> int:
    return int((config or {}).get("schema_options", {}).get("bucket_count", DEFAULT_BUCKET_COUNT))


def _write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def cmd_profile(args, config) -> int:
    out = _out_dir(args, config)
    table = open_source(_source_from(args, config))
    table_schema = extract_schema(table, _bucket_count(config))
    path = out / f"{table.name}.schema.json"
    path.write_text(table_schema.to_json(), encoding="utf-8")
    _update_manifest(out, config, _seed_from(args, config), [path])
    print(f"wrote {path}")
    return 0


def _load_schema_or_profile(args, config) -> tuple[Table | None, TableSchema]:
    if getattr(args, "schema", None):
        return None, TableSchema.load(args.schema)
    table = open_source(_source_from(args, config))
    return table, extract_schema(table, _bucket_count(config))


def cmd_gen_data(args, config) -> int:
    out = _out_dir(args, config)
    seed = _seed_from(args, config)
    _, table_schema = _load_schema_or_profile(args, config)
    n = args.n if args.n is not None else table_schema.row_count
    generated = generate_rows(table_schema, n, seed)
    path = out / "data" / f"{table_schema.table_name}.generated.csv"
    write_table(generated, path)
    _update_manifest(out, config, seed, [path], {"gen_data": seed})
    print(f"wrote {path} ({n} rows)")
    return 0


def cmd_drift_data(args, config) -> int:
    if not config:
        raise ConfigError("drift-data requires --config")
    out = _out_dir(args, config)
    seed = _seed_from(args, config)
    thresholds = _thresholds_from(args, config)
    raw_specs = config.get("data_drift", [])
    if not raw_specs:
        raise ConfigError("config has an empty 'data_drift' list")
    specs = []
    for i, d in enumerate(raw_specs):
        try:
            specs.append(DriftSpec.from_dict(d))
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"data_drift[{i}]: {exc}")

    table = open_source(_source_from(args, config))
    table_schema = extract_schema(table, _bucket_count(config))
    drifted, logs = apply_drift(table, table_schema, specs, seed)

    csv_path = out / "data" / f"{table.name}.drifted.csv"
    write_table(drifted, csv_path)
    log_path = _write_json(out / "data" / f"{table.name}.changelog.json", [log.to_dict() for log in logs])

    reports = [check_cardinality_drift(table.row_count, drifted.row_count, thresholds.alpha).to_dict()]
    if table.row_count and drifted.row_count:
        reports.append(check_distributional_drift(table, drifted, table_schema, thresholds.epsilon).to_dict())
    outliers = sum(
        len(log.inserted_row_indices)
        for log in logs
        if log.op_applied.get("op") == "inject_outliers"
    )
    if outliers:
        # local drift has no divergence threshold; any injected point counts
        reports.append(
            DriftReport(
                kind="distributional-local",
                magnitude=float(outliers),
                threshold_used=0.0,
                verdict=True,
                details={"injected_rows": outliers},
            ).to_dict()
        )
    report_path = _write_json(out / "reports" / "data_drift.json", reports)

    step_seeds = {f"drift_step_{i}": seed + i for i in range(len(specs))}
    _update_manifest(out, config, seed, [csv_path, log_path, report_path], step_seeds)
    for r in reports:
        print(f"{r['kind']}: magnitude={r['magnitude']:.4f} threshold={r['threshold_used']} verdict={r['verdict']}")
    return 0


def cmd_gen_templates(args, config) -> int:
    out = _out_dir(args, config)
    seed = _seed_from(args, config)
    _, table_schema = _load_schema_or_profile(args, config)
    tconf = dict((config or {}).get("templates", {}))
    count = int(tconf.pop("count", args.count or 10))
    templates = generate_templates([table_schema], tconf, count, seed)

    tpl_path = out / "workload" / "templates.json"
    save_templates(templates, tpl_path)
    universe = column_universe([table_schema])
    feat_path = out / "workload" / "template_features.csv"
    header = "template_id,predicate_count,join_count,payload_count,table_count,range_count,equality_count"
    lines = [header + "," + ",".join(f"col_{u}" for u in universe)]
    for t in templates:
        vec = template_features(t, universe)
        lines.append(t.id + "," + ",".join(repr(float(v)) for v in vec))
    feat_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    _update_manifest(out, config, seed, [tpl_path, feat_path], {"gen_templates": seed})
    print(f"wrote {tpl_path} ({len(templates)} templates)")
    return 0


def _phase_samplers(phase: dict, template, table_schema):
    spec_map = {
        col: ParamSamplerSpec.from_dict(d) for col, d in phase.get("samplers", {}).items()
    }
    samplers, widths = default_samplers(template, [table_schema], spec_map)
    for col, w in phase.get("widths", {}).items():
        for i, slot in enumerate(template.predicates):
            if slot.column == col:
                widths[i] = float(w)
    return samplers, widths


def cmd_gen_workload(args, config) -> int:
    if not config:
        raise ConfigError("gen-workload requires --config")
    out = _out_dir(args, config)
    seed = _seed_from(args, config)
    thresholds = _thresholds_from(args, config)
    phases_conf = config.get("workload_phases", [])
    if not phases_conf:
        raise ConfigError("config has an empty 'workload_phases' list")

    table = open_source(_source_from(args, config))
    table_schema = extract_schema(table, _bucket_count(config))

    if getattr(args, "templates", None):
        templates = load_templates(args.templates)
    else:
        tconf = dict(config.get("templates", {}))
        count = int(tconf.pop("count", 1))
        templates = generate_templates([table_schema], tconf, count, seed)
    if not templates:
        raise ConfigError("no templates available")

    step_seeds = {}
    phases = []
    written = []
    for idx, phase in enumerate(phases_conf):
        template = templates[int(phase.get("template_index", 0))]
        phase_seed = int(substream(seed, "phase", idx).integers(0, 2**63))
        step_seeds[f"phase_{idx}"] = phase_seed
        samplers, widths = _phase_samplers(phase, template, table_schema)
        if "width_schedule" in phase:
            ws = phase["width_schedule"]
            instances = vary_selectivity(
                template,
                int(ws.get("slot", 0)),
                (float(ws["start"]), float(ws["end"]), int(ws["groups"])),
                int(phase.get("per_group", phase.get("n", 100))),
                samplers,
                phase_seed,
            )
        else:
            instances = instantiate(
                template, samplers, widths, int(phase["n"]), phase_seed, group_id=idx
            )
        if "temporal" in phase:
            pattern = TemporalPattern.from_dict(phase["temporal"])
            offsets = gen_timestamps(pattern, len(instances), phase_seed, phase.get("mode", "quantile"))
            base_epoch = float(phase.get("base_epoch", idx * pattern.window_seconds))
            instances = attach(instances, offsets, base_epoch)
        phases.append(instances)

    all_instances = [q for phase in phases for q in phase]
    sql_path = out / "workload" / "queries.sql"
    write_sql(all_instances, sql_path)
    sidecar_path = out / "workload" / "instances.json"
    save_sidecar(all_instances, sidecar_path)
    written += [sql_path, sidecar_path]

    if len(phases) > 1:
        reports = []
        for i in range(len(phases) - 1):
            report = verify_workload_drift(phases[i], phases[i + 1], table, thresholds)
            reports.append({"phases": [i, i + 1], **report.to_dict()})
        written.append(_write_json(out / "reports" / "workload_drift.json", reports))
        for r in reports:
            print(f"phase {r['phases'][0]} -> {r['phases'][1]}: {r['kind']} (magnitude={r['magnitude']:.4f})")

    sel = selectivity_report(table, all_instances)
    written.append(_write_json(out / "reports" / "selectivity.json", sel.to_dict()))

    _update_manifest(out, config, seed, written, step_seeds)
    print(f"wrote {sql_path} ({len(all_instances)} queries)")
    return 0


def cmd_gen_timestamps(args, config) -> int:
    out = _out_dir(args, config)
    seed = _seed_from(args, config)
    params = {}
    if args.period is not None:
        params["period_seconds"] = args.period
    if args.burst is not None:
        params["burst_size"] = args.burst
    if args.start_rate is not None:
        params["start_rate"] = args.start_rate
    if args.end_rate is not None:
        params["end_rate"] = args.end_rate
    if args.decay is not None:
        params["decay_rate"] = args.decay
    pattern = TemporalPattern(kind=args.kind, window_seconds=args.window, params=params)
    offsets = gen_timestamps(pattern, args.n, seed, args.mode)
    path = _write_json(out / "workload" / "timestamps.json", [round(float(t), 3) for t in offsets])
    _update_manifest(out, config, seed, [path])
    print(f"wrote {path} ({args.n} timestamps)")
    return 0


def cmd_verify(args, config) -> int:
    out = _out_dir(args, config)
    thresholds = _thresholds_from(args, config)
    if args.mode == "data":
        before = open_source(SourceDescriptor(kind="csv", location=args.before))
        after = open_source(SourceDescriptor(kind="csv", location=args.after))
        table_schema = extract_schema(before, _bucket_count(config))
        reports = [
            check_cardinality_drift(before.row_count, after.row_count, thresholds.alpha).to_dict(),
            check_distributional_drift(before, after, table_schema, thresholds.epsilon).to_dict(),
        ]
    else:
        if not args.dataset:
            raise ConfigError("workload verification needs --dataset for the selectivity oracle")
        dataset = open_source(SourceDescriptor(kind="csv", location=args.dataset))
        w1 = load_sidecar(args.before)
        w2 = load_sidecar(args.after)
        reports = [verify_workload_drift(w1, w2, dataset, thresholds).to_dict()]
    path = _write_json(out / "reports" / "verify.json", reports)
    _update_manifest(out, config, _seed_from(args, config), [path])
    for r in reports:
        print(f"{r['kind']}: magnitude={r['magnitude']:.4f} threshold={r['threshold_used']} verdict={r['verdict']}")
    return 0


def cmd_qerror(args, config) -> int:
    out = _out_dir(args, config)
    dataset = open_source(SourceDescriptor(kind="csv", location=args.dataset))
    if args.schema:
        table_schema = TableSchema.load(args.schema)
    else:
        table_schema = extract_schema(dataset, _bucket_count(config))
    instances = load_sidecar(args.workload)
    lines = ["query_id,group_id,estimate,truth,q_error"]
    for i, q in enumerate(instances):
        estimate = histogram_estimate(table_schema, q)
        truth = true_selectivity(dataset, q) * dataset.row_count
        lines.append(
            f"{i},{q.group_id},{repr(float(estimate))},{repr(float(truth))},{repr(q_error(estimate, truth))}"
        )
    path = out / "reports" / "qerror.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    _update_manifest(out, config, _seed_from(args, config), [path])
    print(f"wrote {path} ({len(instances)} queries)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftgen",
        description="Generate and verify data drift, workload drift, and temporal patterns.",
    )
    parser.add_argument("--config", help="JSON scenario config")
    parser.add_argument("--seed", type=int, help="master seed (overrides config)")
    parser.add_argument("--out", help="output directory (overrides config)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="extract a schema from a tabular source")
    p.add_argument("source", nargs="?", help="CSV path (defaults to the config source)")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("gen-data", help="synthesize rows from a schema")
    p.add_argument("source", nargs="?")
    p.add_argument("--schema", help="schema JSON (skips re-profiling)")
    p.add_argument("-n", type=int, help="row count (default: source row count)")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("drift-data", help="apply the config's data drift pipeline")
    p.add_argument("--alpha", type=float)
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_drift_data)

    p = sub.add_parser("gen-templates", help="generate query templates over the schema")
    p.add_argument("source", nargs="?")
    p.add_argument("--schema")
    p.add_argument("--count", type=int)
    p.set_defaults(func=cmd_gen_templates)

    p = sub.add_parser("gen-workload", help="instantiate the config's workload phases")
    p.add_argument("--templates", help="template JSON file (skips generation)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_gen_workload)

    p = sub.add_parser("gen-timestamps", help="generate a timestamp sequence")
    p.add_argument("--kind", required=True, choices=("uniform", "periodic", "trend", "longtail"))
    p.add_argument("--window", type=float, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--period", type=float)
    p.add_argument("--burst", type=int)
    p.add_argument("--start-rate", type=float)
    p.add_argument("--end-rate", type=float)
    p.add_argument("--decay", type=float)
    p.add_argument("--mode", default="quantile", choices=("quantile", "sampled"))
    p.set_defaults(func=cmd_gen_timestamps)

    p = sub.add_parser("verify", help="check drift between two datasets or workloads")
    p.add_argument("--mode", required=True, choices=("data", "workload"))
    p.add_argument("--before", required=True)
    p.add_argument("--after", required=True)
    p.add_argument("--dataset", help="dataset CSV for the workload selectivity oracle")
    p.add_argument("--alpha", type=float)
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("qerror", help="histogram estimate vs full-scan truth per query")
    p.add_argument("--dataset", required=True)
    p.add_argument("--workload", required=True)
    p.add_argument("--schema", help="statistics to estimate with (default: re-profile the dataset)")
    p.set_defaults(func=cmd_qerror)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args.config) if args.config else None
        return args.func(args, config)
    except (ConfigError, ValueError, KeyError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
