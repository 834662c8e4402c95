"""Command-line front end: ``abflux analyze | spectrum | transmit | verify``.

Exit codes: 0 success, 2 configuration error, 3 ambiguous region,
4 numerical failure (including a failed acceptance run).
"""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import channel, constraints, lab, reduced
from .config import RunConfig, demo_config, load_config
from .errors import AbfluxError, ConfigError, NumericalError
from .field_config import ReceiverRegion
from .serialize import channel_report_to_dict, constraint_report_to_dict, dumps, frames_csv, to_csv

SPECTRUM_HEADER = ("n", "analytic", "numeric", "relative_error", "convergence_delta", "gauge_deviation")
CONVERGENCE_HEADER = ("h", "level", "energy", "delta")


class Output:
    """Documents produced by one command; written only after the command succeeds."""

    def __init__(self, primary: str):
        self.primary = primary
        self.files: dict[str, str] = {}
        self.summary: list[str] = []


def cmd_analyze(run: RunConfig, fmt: str) -> Output:
    cfg = run.field_configuration()
    report = constraints.analyze(cfg, run.analysis.samples, run.analysis.seed)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", reduced.TrapSizeWarning)
        trap_ok = reduced.check_trap_size(cfg)
    doc = constraint_report_to_dict(report)
    doc["trap_size_ok"] = trap_ok
    doc["min_trap_radius"] = (
        reduced.min_trap_radius(cfg.constants, cfg.spectator.B) if cfg.spectator.B > 0 else None
    )
    csv_text = to_csv(
        ("x1", "x2", "C12"),
        ((float(x), float(y), float(c)) for (x, y), c in zip(report.samples, report.c12_samples)),
    )
    out = Output(csv_text if fmt == "csv" else dumps(doc))
    out.files["analysis.json"] = dumps(doc)
    if fmt == "csv":
        out.files["constraint_samples.csv"] = csv_text
    out.summary.append(f"classification={report.classification.value} dirac_x1_x2={report.dirac_x1_x2!r}")
    out.summary.extend(f"warning: {w.message}" for w in caught)
    return out


def cmd_spectrum(run: RunConfig, fmt: str) -> Output:
    cfg = run.field_configuration()
    g = run.grid
    system = reduced.reduce(cfg, constraints.analyze(cfg, run.analysis.samples, run.analysis.seed))
    k = g.levels
    sweep = []
    if k > 0:
        study = lab.landau_convergence(cfg, g.nodes_per_radius, k, tol=g.tol)
        grid = lab.Grid2D.disk(cfg.spectator.center, cfg.spectator.radius, g.gauge_nodes_per_radius)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", lab.ResolutionWarning)
            for flux in g.gauge_flux_sweep:
                dev = lab.gauge_invariance_check(cfg.with_source_flux(flux), grid, g.gauge_levels, g.tol)
                sweep.append({"flux": flux, "deviation": dev})
        analytic = system.energies(k)
        numeric = study.final
        delta = study.final_delta
        gauge_max = max((s["deviation"] for s in sweep), default=0.0)
        rows = [
            (n, float(analytic[n]), float(numeric[n]), float(abs(numeric[n] - analytic[n]) / analytic[n]),
             float(delta[n]), gauge_max)
            for n in range(k)
        ]
        conv_rows = study.rows()
        second_order = study.second_order() if len(study.h) > 2 else None
    else:
        rows, conv_rows, second_order = [], [], None
    doc = {
        "schema_version": 1,
        "kind": "SpectrumReport",
        "omega_eff": system.omega_eff,
        "J_AB": system.J_AB,
        "table": [dict(zip(SPECTRUM_HEADER, r)) for r in rows],
        "convergence": [dict(zip(CONVERGENCE_HEADER, r)) for r in conv_rows],
        "second_order": second_order,
        "gauge_sweep": sweep,
    }
    doc = _json_safe(doc)
    table_csv = to_csv(SPECTRUM_HEADER, rows)
    out = Output(table_csv if fmt == "csv" else dumps(doc))
    out.files["spectrum.json"] = dumps(doc)
    if fmt == "csv":
        out.files["spectrum.csv"] = table_csv
        out.files["convergence.csv"] = to_csv(CONVERGENCE_HEADER, conv_rows)
        out.files["gauge.csv"] = to_csv(("flux", "deviation"), [(s["flux"], s["deviation"]) for s in sweep])
    if rows:
        worst = max(r[3] for r in rows)
        out.summary.append(f"levels={k} max_relative_error={worst:.3e} gauge_deviation={rows[0][5]:.3e}")
    else:
        out.summary.append("levels=0")
    return out


def cmd_transmit(run: RunConfig, fmt: str) -> Output:
    cfg = run.field_configuration()
    ch = run.channel
    alphabet = run.flux_alphabet()
    schedule = channel.encode(run.message(), alphabet)
    report = channel.transmit(
        schedule,
        cfg,
        run.noise_model(cfg),
        seed=ch.seed,
        T=ch.T,
        frame_duration=ch.frame_duration,
        decoder_tolerance=ch.decoder_tolerance,
    )
    doc = channel_report_to_dict(report)
    csv_text = frames_csv(report)
    out = Output(csv_text if fmt == "csv" else dumps(doc))
    out.files["channel_report.json"] = dumps(doc)
    if fmt == "csv":
        out.files["frames.csv"] = csv_text
    out.summary.append(
        f"frames={len(report.frames)} SER={report.symbol_error_rate!r} "
        f"E0_jitter={report.E0_jitter_stddev!r} blind_area={report.blind_area}"
    )
    return out


def cmd_verify() -> int:
    from .acceptance import run_all

    results = run_all()
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 4


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if np.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


COMMANDS = {"analyze": cmd_analyze, "spectrum": cmd_spectrum, "transmit": cmd_transmit}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abflux", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("analyze", "constraint analysis of the reduced system at the receiver"),
        ("spectrum", "analytic ladder vs finite-difference Landau levels"),
        ("transmit", "simulate the flux-modulation channel"),
        ("verify", "run the acceptance checks"),
    ):
        p = sub.add_parser(name, help=help_text)
        if name == "verify":
            continue
        p.add_argument("--config", type=Path, help="JSON run configuration (default: built-in demo)")
        p.add_argument("--out", type=Path, help="directory for output files")
        p.add_argument("--format", choices=("json", "csv"), help="primary output format")
        p.add_argument("--seed", type=int, help="override the configured seeds")
        p.add_argument(
            "--blind", action="store_true", help="with the built-in demo, place the receiver in the intervening region"
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify()
    try:
        if args.config is not None:
            run = load_config(args.config)
        else:
            region = ReceiverRegion.INTERVENING if args.blind else ReceiverRegion.INSIDE_SPECTATOR
            run = demo_config(region)
        if args.seed is not None:
            run = run.with_seed(args.seed)
        fmt = args.format or run.output.format
        out_dir = args.out if args.out is not None else (Path(run.output.dir) if run.output.dir else None)
        result = COMMANDS[args.command](run, fmt)
    except AbfluxError as exc:
        print(f"abflux {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"abflux {args.command}: numerical failure: {exc}", file=sys.stderr)
        return NumericalError.exit_code
    if out_dir is None:
        sys.stdout.write(result.primary)
        for line in result.summary:
            print(line, file=sys.stderr)
        return 0
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in result.files.items():
            (out_dir / name).write_text(text)
    except OSError as exc:
        print(f"abflux {args.command}: cannot write output: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    for line in result.summary:
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
