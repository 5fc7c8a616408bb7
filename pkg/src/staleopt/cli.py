"""Command-line front end.

Subcommands: ``run`` one experiment, ``sweep`` the configured axes,
``compare`` two saved runs, ``gen-data`` a synthetic CSV dataset,
``stats`` the realized delay distribution of a schedule, and ``audit``
(a run with every per-step invariant asserted; first violation is
reported with a state dump).

Exit codes: 0 success, 1 configuration error (the message names the
offending key), 2 numeric abort or invariant violation.  With ``--json``
results go to stdout and errors to stderr as single JSON objects that
validate against ``docs/cli_output.schema.json``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import harness
from .datasets import save_csv, synth_classification
from .delays import delay_stats, realized_delays
from .errors import (AuditViolation, ConfigurationError, InvalidArgument,
                     InvalidComparison, MalformedInput, NumericError,
                     OptimizerFailure, StaleOptError)

_CONFIG_ERRORS = (ConfigurationError, MalformedInput, InvalidArgument,
                  InvalidComparison)
_NUMERIC_ERRORS = (NumericError, OptimizerFailure, AuditViolation)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="staleopt",
                                     description="delay-robust optimization benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, help="override run.seed")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       dest="overrides", help="dotted-path config override (repeatable)")
        p.add_argument("--record-every", type=int, help="override run.record_every")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p_run = sub.add_parser("run", help="execute one configured run")
    common(p_run)
    p_audit = sub.add_parser("audit", help="run with per-step invariant checks")
    common(p_audit)
    p_sweep = sub.add_parser("sweep", help="execute the configured sweep axes")
    common(p_sweep)
    p_sweep.add_argument("--jobs", type=int,
                         default=int(os.environ.get("STALE_OPT_JOBS", "1")),
                         help="parallel sweep workers (env STALE_OPT_JOBS)")

    p_cmp = sub.add_parser("compare", help="paired report of two saved runs")
    p_cmp.add_argument("run_a", help="summary JSON of the first run")
    p_cmp.add_argument("run_b", help="summary JSON of the second run")
    p_cmp.add_argument("--metric", default="excess_loss",
                       choices=["excess_loss", "loss", "accuracy", "regret"])
    p_cmp.add_argument("--out", default=None, help="directory for the report file")
    p_cmp.add_argument("--json", action="store_true")

    p_gen = sub.add_parser("gen-data", help="write a synthetic classification CSV")
    p_gen.add_argument("--out", required=True, help="output CSV path")
    p_gen.add_argument("--dimension", type=int, required=True)
    p_gen.add_argument("--examples", type=int, required=True)
    p_gen.add_argument("--classes", type=int, default=2)
    p_gen.add_argument("--separation", type=float, default=3.0)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--json", action="store_true")

    p_stats = sub.add_parser("stats", help="realized delay statistics of a schedule")
    p_stats.add_argument("--config", required=True)
    p_stats.add_argument("--T", type=int, required=True)
    p_stats.add_argument("--seed", type=int)
    p_stats.add_argument("--set", action="append", default=[], dest="overrides",
                         metavar="KEY=VALUE")
    p_stats.add_argument("--json", action="store_true")
    return parser


def _emit(args, payload: dict, human: str):
    if args.json:
        print(json.dumps(payload, sort_keys=True, default=repr))
    else:
        print(human)


def _overrides(args) -> list[str]:
    overrides = list(args.overrides or [])
    if getattr(args, "seed", None) is not None:
        overrides.append(f"run.seed={args.seed}")
    if getattr(args, "record_every", None) is not None:
        overrides.append(f"run.record_every={args.record_every}")
    return overrides


def _do_run(args, audit: bool) -> int:
    cfg = harness.apply_overrides(harness.load_config(args.config), _overrides(args))
    record = harness.run_config(cfg, audit=audit)
    csv_path, json_path = harness.write_run(record, args.out)
    payload = {
        "command": "audit" if audit else "run",
        "outputs": {"csv": str(csv_path), "summary": str(json_path)},
        "summary": record.summary(),
    }
    if record.aborted:
        _emit(args, payload, f"run aborted: {record.abort_reason}\npartial record: {csv_path}")
        return 2
    human = (f"{record.algorithm}: T={record.T} seed={record.seed} "
             f"final excess={record.final_excess:.6g} accuracy={record.final_accuracy:.4g}\n"
             f"wrote {csv_path} and {json_path}")
    if audit:
        human += "\naudit: all per-step invariants held"
    _emit(args, payload, human)
    return 0


def _do_sweep(args) -> int:
    cfg = harness.apply_overrides(harness.load_config(args.config), _overrides(args))
    result = harness.sweep(cfg, jobs=max(1, args.jobs))
    sweep_csv, sweep_json = harness.write_sweep(result, args.out)
    payload = {
        "command": "sweep",
        "outputs": {"sweep_csv": str(sweep_csv), "sweep_json": str(sweep_json)},
        "table": result.table(),
    }
    lines = [f"{len(result.points)} runs -> {sweep_csv}"]
    for row in result.table():
        axes = {k: v for k, v in row.items()
                if k not in ("final_excess_loss", "final_accuracy", "final_loss",
                             "config_hash")}
        lines.append(f"  {axes}: excess={row['final_excess_loss']:.6g} "
                     f"accuracy={row['final_accuracy']:.4g}")
    _emit(args, payload, "\n".join(lines))
    return 0


def _do_compare(args) -> int:
    rec_a = harness.read_run(args.run_a)
    rec_b = harness.read_run(args.run_b)
    report = harness.compare(rec_a, rec_b, metric=args.metric)
    payload = {"command": "compare", "report": report}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "compare.json").write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    human = (f"{args.metric}: {report['a']['algorithm']}={report['a']['value']:.6g} vs "
             f"{report['b']['algorithm']}={report['b']['value']:.6g} "
             f"ratio={report['ratio']:.4g} difference={report['difference']:.6g}")
    _emit(args, payload, human)
    return 0


def _do_gen_data(args) -> int:
    ds = synth_classification(args.dimension, args.examples, args.classes,
                              args.separation, args.seed)
    save_csv(ds, args.out)
    payload = {"command": "gen-data",
               "outputs": {"csv": args.out},
               "examples": ds.example_count, "features": ds.feature_count,
               "classes": ds.class_count}
    _emit(args, payload,
          f"wrote {ds.example_count} examples x {ds.feature_count} features to {args.out}")
    return 0


def _do_stats(args) -> int:
    cfg = harness.apply_overrides(harness.load_config(args.config), args.overrides or [])
    schedule = harness.build_schedule(cfg)
    seed = args.seed if args.seed is not None else int(cfg.get("run", {}).get("seed", 0))
    stats = delay_stats(realized_delays(schedule, args.T, seed))
    payload = {"command": "stats", "T": args.T, "seed": seed,
               "delay_stats": stats.as_dict()}
    _emit(args, payload,
          f"delays over T={args.T}: mean={stats.mean:.4g} variance={stats.variance:.4g} "
          f"max={stats.max_delay}")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    json_mode = getattr(args, "json", False)
    try:
        if args.command == "run":
            return _do_run(args, audit=False)
        if args.command == "audit":
            return _do_run(args, audit=True)
        if args.command == "sweep":
            return _do_sweep(args)
        if args.command == "compare":
            return _do_compare(args)
        if args.command == "gen-data":
            return _do_gen_data(args)
        if args.command == "stats":
            return _do_stats(args)
        raise ConfigurationError(f"unknown command {args.command!r}")
    except _CONFIG_ERRORS as exc:
        _fail(json_mode, exc, code=1)
        return 1
    except _NUMERIC_ERRORS as exc:
        _fail(json_mode, exc, code=2)
        return 2
    except StaleOptError as exc:
        _fail(json_mode, exc, code=1)
        return 1


def _fail(json_mode: bool, exc: Exception, code: int):
    if json_mode:
        error = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, AuditViolation):
            error["step"] = exc.step
            error["dump"] = exc.dump
        print(json.dumps({"error": error}, sort_keys=True, default=repr),
              file=sys.stderr)
    else:
        prefix = "configuration error" if code == 1 else "numeric abort"
        print(f"{prefix}: {exc}", file=sys.stderr)
        if isinstance(exc, AuditViolation) and exc.dump:
            print(f"state dump at step {exc.step}:", file=sys.stderr)
            for key, value in exc.dump.items():
                print(f"  {key} = {value}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
