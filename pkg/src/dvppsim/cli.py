"""Command-line entry points.

Subcommands: run (simulate a preset or config file and persist the trace),
certify (check observer gains), validate (check a config file), presets
(list or export the built-in scenarios). Exit codes: 0 success, 1 validation
failure, 2 numeric fault, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from .config import config_hash, load_scenario, save_scenario
from .engine import (ScenarioSpec, Simulation, certification_report, run,
                     summary_dict)
from .errors import ConfigError, NumericFault, ValidationError
from .presets import PRESET_NAMES, preset
from . import traceio

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2
EXIT_IO = 3

OUTPUT_DIR_ENV = "DVPPSIM_OUTPUT_DIR"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dvppsim",
        description="Deterministic simulator for coordinated fast frequency "
                    "regulation in dynamic virtual power plants.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source(p):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--preset", choices=PRESET_NAMES,
                         help="built-in scenario name")
        src.add_argument("--scenario", metavar="PATH",
                         help="scenario config file (JSON)")

    p_run = sub.add_parser("run", help="simulate a scenario and write the trace")
    add_source(p_run)
    p_run.add_argument("--out", default=None, metavar="DIR",
                       help=f"output directory (default: ${OUTPUT_DIR_ENV} or ./out)")
    p_run.add_argument("--format", choices=("csv", "npz", "both"), default=None,
                       help="trace file format (default: config's output.format)")
    p_run.add_argument("--seed", type=int, default=None, help="override the seed")
    p_run.add_argument("--dt", type=float, default=None, help="override the step size")
    p_run.add_argument("--decimation", type=int, default=None,
                       help="persist every k-th row (metrics use the full trace)")
    p_run.add_argument("--plots", action="store_true", help="write plot panels")
    p_run.add_argument("--rocof-window", nargs=2, type=float, default=None,
                       metavar=("T0", "T1"), help="window for the RMS RoCoF metric")
    p_run.add_argument("--settle-tol", type=float, default=1e-4,
                       help="|omega| threshold for settling times")
    p_run.add_argument("--inertia-weighted-mean", action="store_true",
                       help="weight the mean grid frequency by inertia")

    p_cert = sub.add_parser("certify", help="certify observer gains per node")
    add_source(p_cert)

    p_val = sub.add_parser("validate", help="validate a scenario config file")
    p_val.add_argument("--scenario", metavar="PATH", required=True)

    p_pre = sub.add_parser("presets", help="list built-in scenarios")
    p_pre.add_argument("--emit", choices=PRESET_NAMES, default=None,
                       help="write the named preset as a config file")
    p_pre.add_argument("--out", default=None, metavar="PATH",
                       help="destination for --emit")
    return parser


def _load_spec(args) -> ScenarioSpec:
    if getattr(args, "preset", None):
        spec = preset(args.preset)
    else:
        spec = load_scenario(args.scenario)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "dt", None) is not None:
        overrides["dt"] = args.dt
        if spec.stochastic.bmr is not None:
            overrides["stochastic"] = dataclasses.replace(
                spec.stochastic,
                bmr=dataclasses.replace(spec.stochastic.bmr, dt=args.dt))
    if overrides:
        spec = dataclasses.replace(spec, **overrides)
    return spec


def _cmd_run(args) -> int:
    spec = _load_spec(args)
    outdir = Path(args.out or os.environ.get(OUTPUT_DIR_ENV, "out")) / spec.name
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        print(f"error: cannot create output directory: {e}", file=sys.stderr)
        return EXIT_IO
    trace = run(spec)

    fmt = args.format or spec.output.format
    decimation = args.decimation or spec.output.decimation
    window = tuple(args.rocof_window) if args.rocof_window else None
    summary = summary_dict(trace, rocof_window=window, settle_tol=args.settle_tol)
    summary["config_hash"] = config_hash(spec)
    try:
        if fmt in ("csv", "both"):
            traceio.write_csv(trace, outdir / "trace.csv", decimation=decimation)
            summary["trace_sha256"] = traceio.file_sha256(outdir / "trace.csv")
        if fmt in ("npz", "both"):
            traceio.write_npz(trace, outdir / "trace.npz", decimation=decimation)
        traceio.write_header(trace, outdir / "header.json")
        (outdir / "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        if args.plots or spec.output.plots:
            from .viz import plot_trace
            plot_trace(trace, outdir)
    except OSError as e:
        print(f"error: cannot write outputs: {e}", file=sys.stderr)
        return EXIT_IO

    print(f"scenario {spec.name}: {trace.n_records} records -> {outdir}")
    print(f"  config hash  {summary['config_hash'][:16]}")
    if "trace_sha256" in summary:
        print(f"  trace sha256 {summary['trace_sha256'][:16]}")
    print(f"  rms RoCoF (mean freq, window {summary['rocof_window']}): "
          f"{summary['rms_rocof_mean']:.6g}")
    for node, vals in summary["final"].items():
        print(f"  node {node}: omega={vals['omega']:+.3e}  "
              f"bess={vals['bess_power']:+.6f}  u_delta={vals['dapi_integral']:+.6f}  "
              f"tie={vals['tie_flow']:+.3e}")
    return EXIT_OK


def _cmd_certify(args) -> int:
    spec = _load_spec(args)
    report = certification_report(spec)
    all_ok = True
    for entry in report:
        status = "certified" if entry["certified"] else "NOT CERTIFIED"
        all_ok &= entry["certified"]
        print(f"node {entry['node']} (H={entry['H']}): {status}, "
              f"max Re(eig) = {entry['cert_margin']:.4g}, kappa = {entry['kappa']}")
    return EXIT_OK if all_ok else EXIT_VALIDATION


def _cmd_validate(args) -> int:
    spec = load_scenario(args.scenario)
    print(f"{args.scenario}: OK ({spec.name}, {len(spec.topology.node_ids)} nodes, "
          f"horizon {spec.horizon} s, hash {config_hash(spec)[:16]})")
    return EXIT_OK


def _cmd_presets(args) -> int:
    if args.emit:
        if not args.out:
            print("error: --emit requires --out PATH", file=sys.stderr)
            return EXIT_VALIDATION
        try:
            save_scenario(preset(args.emit), args.out)
        except OSError as e:
            print(f"error: cannot write config: {e}", file=sys.stderr)
            return EXIT_IO
        print(f"wrote {args.emit} -> {args.out}")
        return EXIT_OK
    for name in PRESET_NAMES:
        spec = preset(name)
        sto = "stochastic" if spec.stochastic.nodes else "deterministic"
        print(f"{name:15s} horizon {spec.horizon:5.1f} s, {len(spec.events)} events, {sto}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "certify": _cmd_certify,
                "validate": _cmd_validate, "presets": _cmd_presets}
    try:
        return handlers[args.command](args)
    except (ValidationError, ConfigError, LookupError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericFault as e:
        print(f"numeric fault: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
