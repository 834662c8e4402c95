"""Acceptance checks shared by ``abflux verify`` and tests/test_acceptance.py.

Each check returns a CriterionResult and never raises on a failed criterion;
unexpected exceptions are reported as failures with their message.
"""
from __future__ import annotations

import contextlib
import io
import math
import os
import tempfile
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import channel, constraints, lab, reduced
from .config import demo_config
from .errors import AbfluxError, DegenerateSystemError
from .field_config import FieldConfiguration, GaugePrimitive, PhysicalConstants, ReceiverRegion


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.name}: {self.detail}"


def _config(mu=1.0, q=1.0, c=1.0, hbar=1.0, B0=1.0, Bc=1.0, a0=1.0, ac=1.5, xC=5.0, region="InsideSpectator"):
    return FieldConfiguration(
        source=GaugePrimitive((0.0, 0.0), a0, B0),
        spectator=GaugePrimitive((xC, 0.0), ac, Bc),
        constants=PhysicalConstants(hbar=hbar, c=c, mu=mu, q=q),
        receiver_region=region,
    )


def _disk_points(rng, center, radius, n, margin=0.02):
    r = radius * (1 - margin) * np.sqrt(rng.uniform(size=n))
    t = rng.uniform(0, 2 * np.pi, size=n)
    return np.asarray(center) + np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)


def region_iii_points(rng, cfg: FieldConfiguration, n: int, margin: float = 0.02) -> np.ndarray:
    pts = []
    while sum(len(p) for p in pts) < n:
        cand = rng.uniform([-3 * cfg.source.radius, -2 * cfg.x_C], [cfg.x_C + 3 * cfg.spectator.radius, 2 * cfg.x_C], size=(4 * n, 2))
        ok = (cfg.source.distance(cand) > cfg.source.radius * (1 + margin)) & (
            cfg.spectator.distance(cand) > cfg.spectator.radius * (1 + margin)
        )
        pts.append(cand[ok])
    return np.concatenate(pts)[:n]


def criterion_constraint_matrix() -> CriterionResult:
    rng = np.random.default_rng(101)
    cfg = _config(mu=1.7, q=1.3, c=0.9, B0=0.8, Bc=2.3)
    mu_omega = cfg.constants.mu * cfg.constants.omega(cfg.spectator.B)
    L2 = constraints.reduced_circle_ii(cfg)
    C = constraints.constraint_matrix(L2, _disk_points(rng, cfg.spectator.center, cfg.spectator.radius, 1000))
    err2 = float(np.max(np.abs(C[:, 0, 1] - mu_omega)) / mu_omega)
    antisym = bool(np.all(C[:, 0, 1] == -C[:, 1, 0]) and np.all(C[:, 0, 0] == 0) and np.all(C[:, 1, 1] == 0))
    L3 = constraints.reduced_region_iii(replace(cfg, receiver_region=ReceiverRegion.INTERVENING))
    C3 = constraints.constraint_matrix(L3, region_iii_points(rng, cfg, 1000))
    max3 = float(np.max(np.abs(C3)))
    ok = err2 <= 1e-12 and max3 < 1e-10 and antisym
    return CriterionResult(1, "constraint matrix", ok, f"circle II rel err {err2:.2e} (<=1e-12); region III max |C12| {max3:.2e} (<1e-10)")


def criterion_dirac_bracket() -> CriterionResult:
    rng = np.random.default_rng(202)
    worst_d = worst_qp = 0.0
    for _ in range(100):
        mu, omega = rng.uniform(0.1, 10.0, size=2)
        cst = PhysicalConstants(mu=mu)
        cfg = _config(mu=mu, Bc=omega * cst.mu * cst.c / cst.q)
        report = constraints.analyze(cfg, n_samples=16)
        d = constraints.dirac_bracket_coordinates(report)
        worst_d = max(worst_d, abs(d * mu * omega - 1.0))
        worst_qp = max(worst_qp, abs(constraints.canonical_pair(report).bracket - 1.0))
    ok = worst_d <= 1e-14 and worst_qp <= 1e-14
    return CriterionResult(2, "Dirac bracket", ok, f"max rel err {{x1,x2}}_D {worst_d:.2e}, {{q,p}}_D-1 {worst_qp:.2e} (<=1e-14)")


def criterion_angular_momentum() -> CriterionResult:
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(50):
        mu, q, c, B0, a0 = rng.uniform(0.2, 5.0, size=5)
        cfg = _config(mu=mu, q=q, c=c, B0=B0, a0=a0, Bc=1.0, ac=1.0, xC=a0 + 3.0)
        report = constraints.analyze(cfg)
        system = reduced.reduce(cfg, report)
        const = reduced.source_angular_momentum(cfg, report.samples)
        algebraic = 0.5 * mu * cfg.constants.omega(B0) * a0**2
        flux_form = q * (math.pi * a0**2 * B0) / (2 * math.pi * c)
        scale = abs(flux_form)
        worst = max(worst, float(np.max(np.abs(const - algebraic))) / scale, float(np.max(np.abs(const - flux_form))) / scale,
                    abs(system.J_AB - flux_form) / scale)
    cfg = demo_config().field_configuration()
    system = reduced.reduce(cfg, constraints.analyze(cfg))
    n = np.arange(200)
    e_gap = np.diff(system.energy(n))
    j_gap = np.diff(system.angular_momentum(n))
    hw = cfg.constants.hbar * system.omega_eff
    # J_AB + hbar (n + 1/2) rounds once per rung; allow that rounding and nothing more
    ulp = 4 * np.spacing(np.abs(system.angular_momentum(n)).max())
    exact = bool(np.all(e_gap == hw) and np.all(np.abs(j_gap - cfg.constants.hbar) <= ulp))
    ok = worst <= 1e-12 and exact
    return CriterionResult(
        3, "angular-momentum reduction", ok,
        f"constant-term rel err {worst:.2e} (<=1e-12); energy spacing bitwise exact, J spacing within 4 ulp: {exact}",
    )


def criterion_flux_invisibility() -> CriterionResult:
    cfg = demo_config().field_configuration()
    ladders = {
        reduced.reduce(c, constraints.analyze(c)).energies(10).tobytes()
        for c in (cfg.with_source_flux(f) for f in (0.0, 1.0, -1.0, 5.0, -5.0, 123.4))
    }
    grid = lab.Grid2D.disk(cfg.spectator.center, cfg.spectator.radius, 48)
    devs = {f: lab.gauge_invariance_check(cfg.with_source_flux(f), grid, 3) for f in (0.0, 1.0, -1.0, 5.0, -5.0)}
    worst = max(devs.values())
    ok = len(ladders) == 1 and worst <= 1e-6
    return CriterionResult(4, "flux invisibility in spectra", ok, f"analytic ladder flux-independent: {len(ladders) == 1}; max numeric deviation {worst:.2e} (<=1e-6)")


def criterion_landau() -> CriterionResult:
    cfg = demo_config().field_configuration()
    ell = cfg.constants.magnetic_length(cfg.spectator.B)
    regime = cfg.spectator.radius >= 6 * ell * (1 - 1e-12)
    study = lab.landau_convergence(cfg, (32, 64, 128), 3)
    system = reduced.reduce(cfg, constraints.analyze(cfg))
    rel = np.abs(study.final - system.energies(3)) / system.energies(3)
    ok = regime and study.second_order() and bool(np.all(rel <= 0.02))
    return CriterionResult(
        5, "Landau oracle", ok,
        f"a_c/l = {cfg.spectator.radius / ell:.2f}; rel errors {', '.join(f'{r:.1e}' for r in rel)} (<=2e-2); "
        f"halving ratios min {study.ratios.min():.2f} (>=3)",
    )


def criterion_size_bound() -> CriterionResult:
    rng = np.random.default_rng(606)
    worst = 0.0
    for _ in range(100):
        hbar, c, q, B = rng.uniform(0.1, 10, size=4)
        cst = PhysicalConstants(hbar=hbar, c=c, q=q)
        worst = max(worst, abs(reduced.min_trap_radius(cst, B) / math.sqrt(c * hbar / (q * B)) - 1))
    unit = reduced.min_trap_radius(PhysicalConstants(), 1.0) == 1.0 and reduced.min_trap_radius(PhysicalConstants(), 4.0) == 0.5
    small = _config(Bc=1.0, ac=0.5)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        flagged = not reduced.check_trap_size(small)
    warned = any(issubclass(w.category, reduced.TrapSizeWarning) for w in caught)
    with warnings.catch_warnings(record=True) as caught_ok:
        warnings.simplefilter("always")
        reduced.check_trap_size(_config(Bc=1.0, ac=1.5))
    quiet = not caught_ok
    ok = worst <= 1e-15 and unit and flagged and warned and quiet
    return CriterionResult(6, "size bound", ok, f"formula rel err {worst:.1e}; B=1->1, B=4->0.5: {unit}; warns below bound: {warned}; silent above: {quiet}")


def _channel_run(region: ReceiverRegion, n: int = 10_000, seed: int = 2024):
    cfg = demo_config(region).field_configuration()
    alphabet = channel.FluxAlphabet.evenly_spaced(4, math.pi)
    msg = np.random.default_rng(seed).integers(0, 4, n)
    return channel.transmit(channel.encode(msg, alphabet), cfg, channel.default_noise(cfg), seed=seed)


def criterion_noise_immunity() -> CriterionResult:
    report = _channel_run(ReceiverRegion.INSIDE_SPECTATOR)
    audit = channel.energy_transmission_audit(report)
    cst = report.config.constants
    exact_J = all(f.J_readout == cst.q * f.flux / (2 * math.pi * cst.c) for f in report.frames)
    ok = (
        len(report.frames) == 10_000
        and report.symbol_error_rate == 0.0
        and report.E0_jitter_stddev > 0
        and abs(audit.regression_slope) <= 1e-12
        and audit.max_flux_energy_coupling == 0.0
        and exact_J
    )
    return CriterionResult(
        7, "noise immunity", ok,
        f"SER={report.symbol_error_rate} E0 std={report.E0_jitter_stddev:.3e} slope={audit.regression_slope:.1e} "
        f"dE0/dPhi={audit.max_flux_energy_coupling:.1e} J exact: {exact_J}",
    )


def criterion_blind_area() -> CriterionResult:
    report = _channel_run(ReceiverRegion.INTERVENING)
    all_blind = all(f.symbol_out is channel.Outcome.NO_SIGNAL for f in report.frames) and report.blind_area
    cfg = demo_config(ReceiverRegion.INTERVENING).field_configuration()
    degenerate = constraints.analyze(cfg)
    refusals = 0
    for call in (
        lambda: reduced.reduce(cfg, degenerate),
        lambda: constraints.dirac_bracket_coordinates(degenerate),
        lambda: constraints.canonical_pair(degenerate),
    ):
        try:
            call()
        except DegenerateSystemError:
            refusals += 1
    ok = all_blind and refusals == 3 and len(report.frames) == 10_000
    return CriterionResult(8, "blind area", ok, f"all {len(report.frames)} frames NoSignal: {all_blind}; quantization refusals {refusals}/3")


def _transmit_bytes(config_path: Path, threads: str) -> bytes:
    from .cli import main

    old = os.environ.get("ABFLUX_THREADS")
    os.environ["ABFLUX_THREADS"] = threads
    try:
        with tempfile.TemporaryDirectory() as tmp, contextlib.redirect_stdout(io.StringIO()):
            code = main(["transmit", "--config", str(config_path), "--out", tmp, "--format", "csv", "--seed", "99"])
            if code != 0:
                raise AbfluxError(f"transmit exited with {code}")
            return (Path(tmp) / "channel_report.json").read_bytes() + (Path(tmp) / "frames.csv").read_bytes()
    finally:
        if old is None:
            os.environ.pop("ABFLUX_THREADS", None)
        else:
            os.environ["ABFLUX_THREADS"] = old


def criterion_determinism() -> CriterionResult:
    run = demo_config()
    run = run.model_copy(update={"channel": run.channel.model_copy(update={"message_length": 2000})})
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "run.json"
        path.write_text(run.model_dump_json())
        a = _transmit_bytes(path, "1")
        b = _transmit_bytes(path, "1")
        c = _transmit_bytes(path, "4")
    ok = a == b == c
    return CriterionResult(9, "determinism", ok, f"repeat identical: {a == b}; serial vs 4 threads identical: {a == c}; {len(a)} bytes")


CRITERIA: list[Callable[[], CriterionResult]] = [
    criterion_constraint_matrix,
    criterion_dirac_bracket,
    criterion_angular_momentum,
    criterion_flux_invisibility,
    criterion_landau,
    criterion_size_bound,
    criterion_noise_immunity,
    criterion_blind_area,
    criterion_determinism,
]


def run_criterion(check: Callable[[], CriterionResult]) -> CriterionResult:
    try:
        return check()
    except Exception as exc:  # a crash is a failed criterion, not an aborted run
        number = CRITERIA.index(check) + 1 if check in CRITERIA else 0
        return CriterionResult(number, check.__name__, False, f"{type(exc).__name__}: {exc}")


def run_all() -> list[CriterionResult]:
    return [run_criterion(check) for check in CRITERIA]
