"""Schema-stable JSON/CSV encodings of reports.

Floats are written with ``repr``, the shortest string that parses back to the
same double, so serialize -> parse reproduces reports exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Sequence

import numpy as np

from .channel import ChannelFrame, ChannelReport, FluxAlphabet, NoiseModel, Outcome, StraySlot
from .constraints import (
    Classification,
    ConstraintReport,
    Provenance,
    SecondaryStatus,
    canonical_pair,
    reduced_circle_ii,
    reduced_region_iii,
)
from .field_config import FieldConfiguration, GaugePrimitive, PhysicalConstants

SCHEMA_VERSION = 1


def _f(x):
    """JSON-safe float: NaN and infinities become null."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def disk_to_dict(p: GaugePrimitive) -> dict:
    return {"center": list(p.center), "radius": p.radius, "B": p.B}


def disk_from_dict(d: dict) -> GaugePrimitive:
    return GaugePrimitive(tuple(d["center"]), d["radius"], d["B"])


def config_to_dict(cfg: FieldConfiguration) -> dict:
    c = cfg.constants
    return {
        "constants": {"hbar": c.hbar, "c": c.c, "mu": c.mu, "q": c.q},
        "source": disk_to_dict(cfg.source),
        "spectator": disk_to_dict(cfg.spectator),
        "strays": [disk_to_dict(s) for s in cfg.strays],
        "receiver_region": cfg.receiver_region.value,
    }


def config_from_dict(d: dict) -> FieldConfiguration:
    return FieldConfiguration(
        source=disk_from_dict(d["source"]),
        spectator=disk_from_dict(d["spectator"]),
        constants=PhysicalConstants(**d["constants"]),
        strays=tuple(disk_from_dict(s) for s in d["strays"]),
        receiver_region=d["receiver_region"],
    )


# -- constraint reports -------------------------------------------------------

def constraint_report_to_dict(report: ConstraintReport) -> dict:
    L = report.lagrangian
    second = report.classification is Classification.SECOND_CLASS
    pair = canonical_pair(report) if second else None
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "ConstraintReport",
        "config": config_to_dict(L.config),
        "lagrangian": {
            "provenance": L.provenance.value,
            "energy": L.energy,
            "gauge_shifted": L.gauge_shifted,
        },
        "constraints": list(report.constraints),
        "samples": [[float(x), float(y)] for x, y in report.samples],
        "C12_samples": [float(v) for v in report.c12_samples],
        "classification": report.classification.value,
        "dirac_x1_x2": report.dirac_x1_x2,
        "canonical_pair": None if pair is None else {"q": "x_1", "p_scale": pair.p_scale, "bracket": pair.bracket},
        "secondary_status": report.secondary_status.value,
        "note": report.note,
    }


def constraint_report_from_dict(d: dict) -> ConstraintReport:
    cfg = config_from_dict(d["config"])
    lag = d["lagrangian"]
    if Provenance(lag["provenance"]) is Provenance.CIRCLE_II:
        L = reduced_circle_ii(cfg, shifted=lag["gauge_shifted"])
    else:
        L = reduced_region_iii(cfg, energy=lag["energy"])
    return ConstraintReport(
        lagrangian=L,
        constraints=list(d["constraints"]),
        samples=np.asarray(d["samples"], dtype=float).reshape(-1, 2),
        c12_samples=np.asarray(d["C12_samples"], dtype=float),
        classification=Classification(d["classification"]),
        dirac_x1_x2=d["dirac_x1_x2"],
        secondary_status=SecondaryStatus(d["secondary_status"]),
        note=d["note"],
    )


def constraint_reports_equal(a: ConstraintReport, b: ConstraintReport) -> bool:
    return (
        a.lagrangian == b.lagrangian
        and a.constraints == b.constraints
        and np.array_equal(a.samples, b.samples)
        and np.array_equal(a.c12_samples, b.c12_samples)
        and a.classification == b.classification
        and a.dirac_x1_x2 == b.dirac_x1_x2
        and a.secondary_status == b.secondary_status
        and a.note == b.note
    )


# -- channel reports ----------------------------------------------------------

def _symbol_to_json(s):
    return s.value if isinstance(s, Outcome) else s


def _symbol_from_json(s):
    return Outcome(s) if isinstance(s, str) else s


def frame_to_dict(f: ChannelFrame) -> dict:
    return {
        "index": f.index,
        "symbol_in": f.symbol_in,
        "flux": f.flux,
        "emit_time": f.emit_time,
        "arrival_time": f.arrival_time,
        "stray_draws": list(f.stray_draws),
        "J_readout": f.J_readout,
        "E0_readout": f.E0_readout,
        "symbol_out": _symbol_to_json(f.symbol_out),
    }


def frame_from_dict(d: dict) -> ChannelFrame:
    return ChannelFrame(
        index=d["index"],
        symbol_in=d["symbol_in"],
        flux=d["flux"],
        emit_time=d["emit_time"],
        arrival_time=d["arrival_time"],
        stray_draws=tuple(d["stray_draws"]),
        J_readout=d["J_readout"],
        E0_readout=d["E0_readout"],
        symbol_out=_symbol_from_json(d["symbol_out"]),
    )


def channel_report_to_dict(report: ChannelReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "ChannelReport",
        "symbol_error_rate": report.symbol_error_rate,
        "J_readout_variance_per_symbol": report.J_readout_variance_per_symbol,
        "E0_jitter_stddev": report.E0_jitter_stddev,
        "noise_applied": report.noise_applied,
        "blind_area": report.blind_area,
        "T": report.T,
        "frame_duration": report.frame_duration,
        "seed": report.seed,
        "decoder_tolerance": _f(report.decoder_tolerance),  # null: single-level alphabet, unbounded
        "alphabet": list(report.alphabet.levels),
        "noise": [
            {"center": list(s.center), "radius": s.radius, "amplitude": s.amplitude} for s in report.noise.slots
        ],
        "config": config_to_dict(report.config),
        "frames": [frame_to_dict(f) for f in report.frames],
    }


def channel_report_from_dict(d: dict) -> ChannelReport:
    return ChannelReport(
        frames=tuple(frame_from_dict(f) for f in d["frames"]),
        symbol_error_rate=d["symbol_error_rate"],
        J_readout_variance_per_symbol=d["J_readout_variance_per_symbol"],
        E0_jitter_stddev=d["E0_jitter_stddev"],
        noise_applied=d["noise_applied"],
        blind_area=d["blind_area"],
        T=d["T"],
        frame_duration=d["frame_duration"],
        seed=d["seed"],
        config=config_from_dict(d["config"]),
        alphabet=FluxAlphabet(tuple(d["alphabet"])),
        noise=NoiseModel(
            tuple(StraySlot(tuple(s["center"]), s["radius"], s["amplitude"]) for s in d["noise"])
        ),
        decoder_tolerance=math.inf if d["decoder_tolerance"] is None else d["decoder_tolerance"],
    )


FRAME_CSV_HEADER = ("index", "flux", "J_readout", "E0_readout", "symbol_out")


def frames_csv(report: ChannelReport) -> str:
    rows = [
        (f.index, repr(f.flux), _csv_num(f.J_readout), _csv_num(f.E0_readout), _symbol_to_json(f.symbol_out))
        for f in report.frames
    ]
    return to_csv(FRAME_CSV_HEADER, rows)


def _csv_num(x) -> str:
    if x is None:
        return ""
    x = float(x)
    return repr(x) if math.isfinite(x) else ""


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_num(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()
