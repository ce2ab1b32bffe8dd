"""Command-line interface.

Every subcommand is deterministic: identical inputs produce identical
bytes on disk, so there is no seed flag anywhere.  Exit codes: 0 success,
2 bad input or configuration, 3 numerical instability.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import List, Optional

from .analysis import Tolerances, classify, integrate_flux_charge, prefix_offsets
from .bench import bench_family
from .defaults import build_model, family_names, resolve_family
from .errors import (
    ConfigError,
    InstabilityError,
    SegmentationError,
    TraceParseError,
)
from .gates import shipped_recipes, truth_table
from .io import (
    RunConfig,
    export_fq,
    export_plot_data,
    export_report,
    export_trace,
    import_trace,
    load_config,
    make_report_document,
)
from .sweep import simulate

_TOL_FIELDS = {f.name: f for f in dataclasses.fields(Tolerances)}


def _parse_tolerance_overrides(pairs: Optional[List[str]]) -> dict:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(
                f"--tolerance expects KEY=VALUE, got {pair!r}"
            )
        key, raw = pair.split("=", 1)
        key = key.strip()
        if key not in _TOL_FIELDS:
            known = ", ".join(sorted(_TOL_FIELDS))
            raise ConfigError(f"unknown tolerance {key!r} (known: {known})")
        try:
            value = int(raw) if key == "smooth_window" else float(raw)
        except ValueError as exc:
            raise ConfigError(
                f"--tolerance {key}: {raw!r} is not a number"
            ) from exc
        out[key] = value
    return out


def _config_from_args(args) -> RunConfig:
    if getattr(args, "config", None):
        cfg = load_config(args.config)
        if getattr(args, "model", None):
            raise ConfigError("pass either --config or --model, not both")
    elif getattr(args, "model", None):
        cfg = RunConfig(family=resolve_family(args.model))
    else:
        raise ConfigError("need --model FAMILY or --config PATH")
    overrides = _parse_tolerance_overrides(getattr(args, "tolerance", None))
    if overrides:
        cfg = dataclasses.replace(
            cfg, tolerances=dataclasses.replace(cfg.tolerances, **overrides)
        )
    return cfg


def _simulate_config(cfg: RunConfig):
    model = build_model(cfg.family, **cfg.overrides)
    return simulate(model, cfg.build_waveform())


def _trace_for_analysis(args, cfg_holder: list):
    """Trace from --in when given, otherwise from a fresh simulation."""
    if getattr(args, "input", None):
        if getattr(args, "model", None) or getattr(args, "config", None):
            raise ConfigError("pass either --in or a model/config, not both")
        tol = Tolerances()
        overrides = _parse_tolerance_overrides(getattr(args, "tolerance", None))
        if overrides:
            tol = dataclasses.replace(tol, **overrides)
        cfg_holder.append(None)
        return import_trace(args.input), tol, {"source": str(args.input)}
    cfg = _config_from_args(args)
    cfg_holder.append(cfg)
    return _simulate_config(cfg), cfg.tolerances, cfg.echo()


def _cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    trace = _simulate_config(cfg)
    out = args.out or cfg.output.get("trace")
    if not out:
        raise ConfigError("simulate needs --out PATH (or [output].trace in config)")
    export_trace(trace, out)
    print(f"{cfg.family}: wrote {len(trace)} samples to {out}")
    return 0


def _cmd_analyze(args) -> int:
    holder: list = []
    trace, tol, echo = _trace_for_analysis(args, holder)
    cfg = holder[0]
    report = classify(trace, tol)
    family = cfg.family if cfg else None
    doc = make_report_document(
        family, config_echo=echo, classification=report
    )
    out = args.out or (cfg.output.get("report") if cfg else None)
    if out:
        export_report(doc, out)
        print(f"report written to {out}")
    plot_dir = args.plot_dir or (cfg.output.get("plot_dir") if cfg else None)
    if plot_dir:
        prefix = family or "trace"
        if cfg and cfg.output.get("plot_prefix"):
            prefix = cfg.output["plot_prefix"]
        files = export_plot_data(trace, plot_dir, prefix=prefix, tol=tol)
        print(f"{len(files)} plot-data files in {plot_dir}")
    fq_out = args.fq_out or (cfg.output.get("fq") if cfg else None)
    if fq_out:
        export_fq(integrate_flux_charge(trace, *prefix_offsets(trace)), fq_out)
        print(f"flux-charge data written to {fq_out}")
    print(f"label: {report.label}")
    return 0


def _cmd_classify(args) -> int:
    holder: list = []
    trace, tol, echo = _trace_for_analysis(args, holder)
    cfg = holder[0]
    report = classify(trace, tol)
    print(report.label)
    for k in sorted(report.criteria):
        print(f"criterion {k}: {'pass' if report.criteria[k] else 'fail'}")
    if args.out:
        family = cfg.family if cfg else None
        doc = make_report_document(
            family, config_echo=echo, classification=report
        )
        export_report(doc, args.out)
    return 0


def _cmd_bench(args) -> int:
    cfg = _config_from_args(args)
    model = build_model(cfg.family, **cfg.overrides)
    report = bench_family(model, n_cycles=args.cycles, n_reads=args.reads)
    rr = report.resistance
    print(
        f"{cfg.family}: ratio={rr.ratio:.3g} "
        f"(expected decades: {rr.expected_log10}) "
        f"disturbed={rr.disturbed}"
    )
    print(
        f"endurance: {report.endurance.n_cycles} cycles, max deviation "
        f"{report.endurance.max_deviation:.3e}"
    )
    for note in report.endurance.notes:
        print(f"  note: {note}")
    print(
        f"retention: t_10pct={report.retention.t_10pct:.4g} s "
        f"(10-year threshold met: {report.retention.meets_10yr})"
    )
    print(f"read disturb per read: {report.read_disturb_per_read:.3e}")
    if args.out:
        doc = make_report_document(
            cfg.family, config_echo=cfg.echo(), bench=report
        )
        export_report(doc, args.out)
        print(f"report written to {args.out}")
    return 0


def _cmd_gates(args) -> int:
    family = resolve_family(args.model) if args.model else "barrier"
    model = build_model(family)
    recipes = shipped_recipes()
    if args.recipe:
        from .gates import load_recipe

        extra = load_recipe(args.recipe)
        recipes = {extra.name: extra}
    tables = {}
    for name in sorted(recipes):
        table = truth_table(model, recipes[name])
        tables[name] = table
        rows = " ".join(f"{k}->{table.outputs[k]}" for k in sorted(table.outputs))
        verdict = "ok" if table.all_match else "MISMATCH"
        print(f"{name:6s} {rows}  [{verdict}]")
    if args.out:
        doc = make_report_document(
            family, config_echo={"family": family}, gates=tables
        )
        export_report(doc, args.out)
        print(f"report written to {args.out}")
    return 0


def _cmd_demo(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = {}
    for family in family_names():
        model = build_model(family)
        cfg = RunConfig(family=family)
        trace = simulate(model, cfg.build_waveform())
        report = classify(trace)
        labels[family] = report.label

        export_trace(trace, out_dir / f"{family}_trace.csv")
        export_fq(
            integrate_flux_charge(trace, *prefix_offsets(trace)),
            out_dir / f"{family}_fq.csv",
        )
        export_plot_data(trace, out_dir, prefix=family)

        sections = {}
        if family == "barrier":
            recipes = shipped_recipes()
            sections["gates"] = {
                name: truth_table(model, recipes[name])
                for name in sorted(recipes)
            }
        doc = make_report_document(
            family,
            config_echo=cfg.echo(),
            classification=report,
            gates=sections.get("gates"),
        )
        export_report(doc, out_dir / f"{family}_report.json")
        print(f"{family}: {report.label}")
    print(f"demo outputs in {out_dir}")
    return 0


def _add_model_options(parser, with_input=False):
    parser.add_argument("--config", help="TOML run config")
    parser.add_argument("--model", help="family name (or alias)")
    parser.add_argument(
        "--tolerance",
        action="append",
        metavar="KEY=VAL",
        help="override one analysis tolerance (repeatable)",
    )
    if with_input:
        parser.add_argument(
            "--in", dest="input", metavar="PATH", help="trace CSV to analyze"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memsim",
        description=(
            "Simulate memristor device families, analyze sweeps in "
            "flux-charge space, benchmark them, and run gate recipes."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a sweep and write the trace")
    _add_model_options(p)
    p.add_argument("--out", help="trace CSV path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="full analysis report for a trace")
    _add_model_options(p, with_input=True)
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--plot-dir", help="directory for per-branch plot data")
    p.add_argument("--fq-out", help="flux-charge CSV path")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("classify", help="print the device label")
    _add_model_options(p, with_input=True)
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("bench", help="benchmark figures for one family")
    _add_model_options(p)
    p.add_argument("--cycles", type=int, default=100, help="endurance cycles")
    p.add_argument("--reads", type=int, default=3, help="read-disturb pulses")
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("gates", help="evaluate gate recipes")
    p.add_argument("--model", help="family name (default: barrier)")
    p.add_argument("--recipe", help="recipe TOML instead of the shipped set")
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=_cmd_gates)

    p = sub.add_parser("demo", help="run all families end to end")
    p.add_argument(
        "--out-dir", default="demo_out", help="output directory (default: demo_out)"
    )
    p.set_defaults(func=_cmd_demo)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TraceParseError, SegmentationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except InstabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
