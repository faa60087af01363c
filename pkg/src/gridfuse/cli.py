"""Command line surface: gen, normalize, fuse, eval.

Exit codes are fixed for scripting: 0 success, 2 usage or configuration
error, 3 input parse error, 4 degenerate-only data, 5 total conflict.
Every command is deterministic given its flags (all randomness flows from
explicit seeds), writes only inside its output directory, and emits a
manifest naming its outputs and the digest of its configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Optional, Sequence

from . import FORMAT_VERSION, __version__, jsonio
from .errors import (
    DegenerateData,
    EmptyIntersection,
    EmptyTable,
    GridfuseError,
    HeaderMismatch,
    InvalidConfig,
    MalformedInput,
    NonMonotonicTimestamps,
    ParamsMismatch,
    TotalConflict,
)
from .evidence import Frame, MassFunction
from .fusion import DEFAULT_VARIANCE_THRESHOLD, combine_report
from .normalize import LAMBDA_GRID, ColumnParams, bc_zscore, column_stats
from .simgen import SOURCE_LAYOUT, ScenarioConfig, generate_scenario
from .tabular import (
    AttributeMeta,
    SampleTable,
    SourceKind,
    format_timestamp,
    parse_csv,
    to_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_DEGENERATE = 4
EXIT_CONFLICT = 5

OUT_DIR_ENV = "GRIDFUSE_OUT"

_USAGE_ERRORS = (InvalidConfig, ParamsMismatch)
_PARSE_ERRORS = (HeaderMismatch, EmptyTable, NonMonotonicTimestamps, EmptyIntersection, MalformedInput)


def _out_dir(args) -> str:
    directory = args.out or os.environ.get(OUT_DIR_ENV) or "."
    os.makedirs(directory, exist_ok=True)
    return directory


def _write_manifest(
    directory: str,
    command: str,
    config: dict,
    seeds: dict,
    outputs: list,
    extra: Optional[dict] = None,
) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "format_version": FORMAT_VERSION,
        "config_digest": jsonio.digest(config),
        "seeds": seeds,
        "outputs": sorted(outputs),
    }
    if extra:
        manifest.update(extra)
    jsonio.write_json_atomic(os.path.join(directory, "manifest.json"), manifest)


def _parse_float_list(text: str, count: Optional[int] = None) -> tuple:
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise InvalidConfig(f"expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(values) not in (1, count):
        raise InvalidConfig(f"expected 1 or {count} values, got {len(values)}")
    if count is not None and len(values) == 1:
        values = values * count
    return values


def _parse_int_list(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise InvalidConfig(f"expected comma-separated integers, got {text!r}") from None


def _scenario_from_args(args) -> ScenarioConfig:
    if args.labels:
        hypotheses = tuple(part.strip() for part in args.labels.split(","))
    else:
        hypotheses = tuple(f"class{i + 1}" for i in range(args.classes))
    return ScenarioConfig(
        n_observations=args.n,
        hypotheses=hypotheses,
        seed=args.seed,
        skew_severity=args.skew_severity,
        conflict_rate=args.conflict_rate,
        source_noise=_parse_float_list(args.noise, 3),
    )


# -- gen ---------------------------------------------------------------------

def cmd_gen(args) -> int:
    config = _scenario_from_args(args)
    directory = _out_dir(args)
    scenario = generate_scenario(config)

    outputs = []
    tables_meta = []
    for table, (kind, _) in zip(scenario.tables, SOURCE_LAYOUT):
        filename = f"{kind.value}.csv"
        jsonio.write_text_atomic(os.path.join(directory, filename), to_csv(table))
        outputs.append(filename)
        tables_meta.append(
            {
                "file": filename,
                "source": kind.value,
                "columns": [{"name": m.name, "unit": m.unit} for m in table.columns],
            }
        )

    label_lines = ["timestamp,label"]
    for ts, label in zip(scenario.tables[0].timestamps, scenario.labels):
        label_lines.append(f"{format_timestamp(ts)},{label}")
    jsonio.write_text_atomic(os.path.join(directory, "labels.csv"), "\n".join(label_lines) + "\n")
    outputs.append("labels.csv")

    _write_manifest(
        directory,
        "gen",
        {"scenario": config.to_json_dict()},
        {"seed": config.seed},
        outputs + ["manifest.json"],
        extra={
            "scenario": config.to_json_dict(),
            "tables": tables_meta,
            "labels_file": "labels.csv",
        },
    )
    return EXIT_OK


# -- normalize ----------------------------------------------------------------

def _infer_schema(raw: bytes) -> list:
    header_line = raw.split(b"\n", 1)[0].decode("utf-8").strip("\r")
    names = next(csv.reader(io.StringIO(header_line)))
    if not names or names[0].strip() != "timestamp":
        raise HeaderMismatch("first column must be 'timestamp'")
    return [AttributeMeta(SourceKind.OPERATION, name.strip()) for name in names[1:]]


def _load_params_sidecar(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
        return {
            name: ColumnParams(
                lam=float(entry["lambda"]),
                shift=float(entry["shift"]),
                mean=float(entry["mean"]),
                std=float(entry["std"]),
                degenerate=bool(entry["degenerate"]),
            )
            for name, entry in payload.items()
        }
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise MalformedInput(f"cannot read params file {path}: {exc}") from None


def cmd_normalize(args) -> int:
    directory = _out_dir(args)
    grid = LAMBDA_GRID
    if args.lambda_grid:
        parts = args.lambda_grid.split(":")
        if len(parts) != 3:
            raise InvalidConfig("--lambda-grid expects LO:HI:STEP")
        grid = tuple(float(p) for p in parts)

    reuse = _load_params_sidecar(args.reuse_params) if args.reuse_params else None

    outputs = []
    dropped_total = 0
    for path in args.inputs:
        with open(path, "rb") as handle:
            raw = handle.read()
        schema = _infer_schema(raw)
        parsed = parse_csv(raw, schema)
        dropped_total += parsed.dropped_rows
        table = parsed.table

        if reuse is not None:
            missing = [m.name for m in table.columns if m.name not in reuse]
            if missing:
                raise ParamsMismatch(f"params file lacks columns: {missing}")
            params = tuple(reuse[m.name] for m in table.columns)
            normalized, params = bc_zscore(table.values, params)
        else:
            normalized, params = bc_zscore(table.values, grid=grid)

        if all(p.degenerate for p in params):
            raise DegenerateData(f"every column of {path} is constant")

        stem = os.path.splitext(os.path.basename(path))[0]
        normalized_table = SampleTable(table.timestamps, normalized, table.columns)
        out_csv = f"{stem}.normalized.csv"
        jsonio.write_text_atomic(os.path.join(directory, out_csv), to_csv(normalized_table))
        outputs.append(out_csv)

        sidecar = {}
        for j, meta in enumerate(table.columns):
            before = column_stats(table.values[:, j])
            after = column_stats(normalized[:, j])
            sidecar[meta.name] = {
                "lambda": params[j].lam,
                "shift": params[j].shift,
                "mean": params[j].mean,
                "std": params[j].std,
                "skew_before": before.skewness,
                "skew_after": after.skewness,
                "degenerate": params[j].degenerate,
            }
        out_json = f"{stem}.params.json"
        jsonio.write_json_atomic(os.path.join(directory, out_json), sidecar)
        outputs.append(out_json)

    config = {
        "inputs": [os.path.basename(p) for p in args.inputs],
        "lambda_grid": list(grid),
        "reuse_params": bool(args.reuse_params),
    }
    _write_manifest(
        directory,
        "normalize",
        config,
        {},
        outputs + ["manifest.json"],
        extra={"dropped_rows": dropped_total},
    )
    return EXIT_OK


# -- fuse ----------------------------------------------------------------------

def _load_mass(path: str) -> MassFunction:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
        return MassFunction.from_json_dict(payload)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise MalformedInput(f"cannot read mass file {path}: {exc}") from None


def cmd_fuse(args) -> int:
    if len(args.masses) < 2:
        raise InvalidConfig("fusion needs at least two --mass files")
    directory = _out_dir(args)
    masses = [_load_mass(path) for path in args.masses]
    frame = masses[0].frame
    watch = args.watch or frame.labels[0]
    if watch not in frame.labels:
        raise InvalidConfig(f"--watch {watch!r} is not a hypothesis of the frame")

    method = args.method.replace("-", "_")
    report = combine_report(masses, method, args.threshold)
    jsonio.write_json_atomic(os.path.join(directory, "report.json"), report.to_json_dict(watch))

    config = {
        "masses": [os.path.basename(p) for p in args.masses],
        "method": method,
        "threshold": args.threshold,
        "watch": watch,
    }
    _write_manifest(directory, "fuse", config, {}, ["report.json", "manifest.json"])
    return EXIT_OK


# -- eval ------------------------------------------------------------------------

def _load_data_dir(data_dir: str):
    manifest_path = os.path.join(data_dir, "manifest.json")
    try:
        with open(manifest_path, "r", encoding="utf-8") as handle:
            manifest = json.load(handle)
        config = ScenarioConfig.from_json_dict(manifest["scenario"])
        tables = []
        for entry in manifest["tables"]:
            kind = SourceKind(entry["source"])
            schema = [
                AttributeMeta(kind, column["name"], column["unit"])
                for column in entry["columns"]
            ]
            with open(os.path.join(data_dir, entry["file"]), "rb") as handle:
                tables.append(parse_csv(handle.read(), schema).table)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, GridfuseError):
            raise
        raise MalformedInput(f"cannot read data dir {data_dir}: {exc}") from None
    return config, tuple(tables)


def cmd_eval(args) -> int:
    from . import report as figures
    from .experiments import run_experiment1, run_experiment2

    directory = _out_dir(args)

    if args.data_dir:
        config, tables = _load_data_dir(args.data_dir)
    else:
        if args.n is None or args.seed is None:
            raise InvalidConfig("eval needs either --data-dir or --n/--seed scenario flags")
        config = _scenario_from_args(args)
        tables = generate_scenario(config).tables

    if args.sizes:
        sizes = _parse_int_list(args.sizes)
    else:
        n = config.n_observations
        sizes = tuple(sorted({max(10, n // 4), max(10, n // 2), max(10, 3 * n // 4), n}))
    methods = tuple(m.replace("-", "_") for m in args.methods.split(","))

    exp1 = run_experiment1(tables)
    exp2 = run_experiment2(
        config,
        sizes,
        methods=methods,
        split_seed=args.split_seed,
        temperature=args.temperature,
        ignorance_floor=args.floor,
        threshold=args.threshold,
    )

    result = {"experiment1": exp1.to_json_dict(), "experiment2": exp2.to_json_dict()}
    jsonio.write_json_atomic(os.path.join(directory, "result.json"), result)

    trace_method = "pca_ds" if "pca_ds" in exp2.interval_trace else methods[0]
    interval_lines = ["step,bel,pl,mu"]
    for step, bel, pl, mu in exp2.interval_trace[trace_method]:
        interval_lines.append(
            f"{step},{format(bel, '.17g')},{format(pl, '.17g')},{format(mu, '.17g')}"
        )
    jsonio.write_text_atomic(os.path.join(directory, "intervals.csv"), "\n".join(interval_lines) + "\n")

    accuracy_lines = ["size,method,accuracy"]
    for size, method, value in sorted(exp2.series):
        accuracy_lines.append(f"{size},{method},{format(value, '.17g')}")
    jsonio.write_text_atomic(os.path.join(directory, "accuracy.csv"), "\n".join(accuracy_lines) + "\n")

    figures.save_normalization_figure(exp1.columns, os.path.join(directory, "normalization.png"))
    figures.save_interval_figure(
        exp2.interval_trace[trace_method],
        os.path.join(directory, "intervals.png"),
        label=trace_method,
    )
    figures.save_accuracy_figure(exp2.series, os.path.join(directory, "accuracy.png"))

    outputs = [
        "result.json",
        "intervals.csv",
        "accuracy.csv",
        "normalization.png",
        "intervals.png",
        "accuracy.png",
        "manifest.json",
    ]
    config_dict = {
        "scenario": config.to_json_dict(),
        "sizes": list(sizes),
        "methods": list(methods),
        "split_seed": args.split_seed,
        "temperature": args.temperature,
        "floor": args.floor,
        "threshold": args.threshold,
    }
    _write_manifest(
        directory,
        "eval",
        config_dict,
        {"seed": config.seed, "split_seed": args.split_seed},
        outputs,
    )
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def _add_scenario_flags(parser, require: bool) -> None:
    parser.add_argument("--n", type=int, required=require, help="number of observations")
    parser.add_argument("--classes", type=int, default=3, help="number of fault classes")
    parser.add_argument("--labels", help="comma-separated class labels (overrides --classes)")
    parser.add_argument("--seed", type=int, required=require, help="scenario seed (unsigned 64 bit)")
    parser.add_argument("--skew-severity", type=float, default=1.0, help="heavy-tail severity")
    parser.add_argument("--conflict-rate", type=float, default=0.0, help="fraction of corrupted observations")
    parser.add_argument("--noise", default="0.15", help="per-source noise (single value or three comma-separated)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridfuse",
        description="Standardize multi-source sensor tables and fuse them as evidence.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"gridfuse {__version__} (format {FORMAT_VERSION})",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="generate a seeded synthetic scenario")
    _add_scenario_flags(gen, require=True)
    gen.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or .)")
    gen.set_defaults(func=cmd_gen)

    norm = commands.add_parser("normalize", help="standardize sample tables")
    norm.add_argument("--in", dest="inputs", action="append", required=True, help="input CSV (repeatable)")
    norm.add_argument("--reuse-params", help="params sidecar from a previous run")
    norm.add_argument("--lambda-grid", help="power-fit grid as LO:HI:STEP")
    norm.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or .)")
    norm.set_defaults(func=cmd_normalize)

    fuse = commands.add_parser("fuse", help="combine mass-function JSON files")
    fuse.add_argument("--mass", dest="masses", action="append", required=True, help="mass JSON (repeatable)")
    fuse.add_argument("--method", choices=["ds", "pca-ds"], default="pca-ds")
    fuse.add_argument("--threshold", type=float, default=DEFAULT_VARIANCE_THRESHOLD)
    fuse.add_argument("--watch", help="hypothesis whose interval is traced")
    fuse.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or .)")
    fuse.set_defaults(func=cmd_fuse)

    evaluate = commands.add_parser("eval", help="run both experiments and render reports")
    evaluate.add_argument("--data-dir", help="directory produced by gen")
    _add_scenario_flags(evaluate, require=False)
    evaluate.add_argument("--sizes", help="comma-separated record counts")
    evaluate.add_argument("--methods", default="ds,pca-ds", help="fusion methods to compare")
    evaluate.add_argument("--split-seed", type=int, default=0)
    evaluate.add_argument("--temperature", type=float, default=0.05)
    evaluate.add_argument("--floor", type=float, default=0.1, help="ignorance floor")
    evaluate.add_argument("--threshold", type=float, default=DEFAULT_VARIANCE_THRESHOLD)
    evaluate.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or .)")
    evaluate.set_defaults(func=cmd_eval)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"gridfuse: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _PARSE_ERRORS as exc:
        print(f"gridfuse: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DegenerateData as exc:
        print(f"gridfuse: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except TotalConflict as exc:
        print(f"gridfuse: {exc}", file=sys.stderr)
        return EXIT_CONFLICT


if __name__ == "__main__":
    sys.exit(main())
