"""Dirac analysis of first-order Lagrangians L = a_i(x) xdot_i - E.

The velocity coefficient is a_i = (q/c) A_i with A a sum of gauge terms, so
the primary constraints are phi_i = p_i - a_i(x) and their Poisson brackets
are C_ij = d_i a_j - d_j a_i = (q/c) eps_ij * (sum of term curls).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Union

import numpy as np
from scipy.stats import qmc

from .errors import AmbiguousRegionError, ConfigError, DegenerateSystemError, NumericalError
from .field_config import (
    FieldConfiguration,
    GaugePrimitive,
    PhysicalConstants,
    ReceiverRegion,
    SymmetricGauge,
    gauge_shift_to_center,
)

GaugeTerm = Union[GaugePrimitive, SymmetricGauge]

FD_STEP = 1e-5
FD_RTOL = 1e-6
MIN_SAMPLES = 16

DEGENERATE_NOTE = (
    "constraint matrix vanishes identically: the inverse does not exist, Dirac "
    "brackets are undefined and there is no way to establish dynamics at the "
    "quantum level (blind area). The secondary constraint -mu*omega_P^2*x_i "
    "references an undefined frequency omega_P and is not constructed; for a "
    "constant energy {phi_i, H_0} = 0 identically."
)


class Provenance(str, Enum):
    CIRCLE_II = "ReducedCircleII"
    REGION_III = "ReducedRegionIII"


class Classification(str, Enum):
    SECOND_CLASS = "SecondClass"
    DEGENERATE = "Degenerate"


class SecondaryStatus(str, Enum):
    NONE_REQUIRED = "NoneRequired"
    DEGENERATE_CHAIN_NOTE = "DegenerateChainNote"


@dataclass(frozen=True)
class FirstOrderLagrangian:
    config: FieldConfiguration
    terms: tuple[GaugeTerm, ...]
    energy: float
    provenance: Provenance
    gauge_shifted: bool = True

    @property
    def constants(self) -> PhysicalConstants:
        return self.config.constants

    def coefficients(self, p) -> np.ndarray:
        """a_i(p), the momenta forced by dL/d(xdot_i)."""
        total = sum(term.potential(p) for term in self.terms)
        return self.constants.coupling * total

    def curl(self, p) -> np.ndarray:
        return self.constants.coupling * sum(term.curl(p) for term in self.terms)

    def __call__(self, x, xdot) -> np.ndarray:
        return np.einsum("...i,...i->...", self.coefficients(x), np.asarray(xdot, dtype=float)) - self.energy

    @property
    def omega_scale(self) -> float:
        return max((abs(self.constants.omega(t.B)) for t in self.terms), default=0.0)

    def in_region(self, p) -> np.ndarray:
        cfg = self.config
        if self.provenance is Provenance.CIRCLE_II:
            return cfg.spectator.contains(p)
        outside = cfg.in_region_iii(p)
        for stray in cfg.strays:
            outside &= ~stray.contains(p)
        return outside

    def describe_constraints(self) -> list[str]:
        k = self.constants.coupling
        parts = []
        for term in self.terms:
            c1, c2 = (term.center if isinstance(term, GaugePrimitive) else term.origin)
            shift = "x_j" if (c1, c2) == (0.0, 0.0) else f"(x_j - ({c1!r}, {c2!r})_j)"
            if isinstance(term, SymmetricGauge):
                parts.append(f"{k * term.B / 2!r} eps_ij {shift}")
            else:
                parts.append(
                    f"{k * term.B / 2!r} eps_ij {shift} * [1 if rho < {term.radius!r} "
                    f"else {term.radius**2!r}/rho^2]"
                )
        body = " + ".join(parts) if parts else "0"
        return [f"phi_{i} = p_{i} + {body.replace('_ij', f'_{i}j')}" for i in (1, 2)]


def reduced_circle_ii(config: FieldConfiguration, shifted: bool = True) -> FirstOrderLagrangian:
    """Reduced Lagrangian for an ion held in the spectator disk at its lowest level."""
    cst = config.constants
    spectator: GaugeTerm = config.spectator
    if shifted:
        spectator = gauge_shift_to_center(config.spectator).shifted
    terms = (spectator, config.source, *config.strays)
    energy = 0.5 * cst.hbar * cst.omega(config.spectator.B)
    return FirstOrderLagrangian(config, terms, energy, Provenance.CIRCLE_II, gauge_shifted=shifted)


def reduced_region_iii(config: FieldConfiguration, energy: float = 0.0) -> FirstOrderLagrangian:
    """Reduced Lagrangian in the intervening region: only AB exteriors act."""
    terms = (config.source, config.spectator, *config.strays)
    return FirstOrderLagrangian(config, terms, energy, Provenance.REGION_III)


def reduced_lagrangian(config: FieldConfiguration) -> FirstOrderLagrangian:
    if config.receiver_region is ReceiverRegion.INSIDE_SPECTATOR:
        return reduced_circle_ii(config)
    return reduced_region_iii(config)


def _check_region(L: FirstOrderLagrangian, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if not np.all(L.in_region(p)):
        raise ConfigError(f"evaluation point outside the {L.provenance.value} region")
    return p


def canonical_momenta(L: FirstOrderLagrangian, p) -> np.ndarray:
    return L.coefficients(_check_region(L, p))


def _boundary_clearance(L: FirstOrderLagrangian, p: np.ndarray) -> np.ndarray:
    clearance = np.full(p.shape[:-1], np.inf)
    for term in L.terms:
        if isinstance(term, GaugePrimitive):
            clearance = np.minimum(clearance, np.abs(term.distance(p) - term.radius))
    return clearance


def constraint_matrix(L: FirstOrderLagrangian, p) -> np.ndarray:
    """C_ij(p) in closed form, cross-checked against central differences of a_i."""
    p = _check_region(L, p)
    scale = np.maximum(1.0, np.abs(p).max(axis=-1))
    h = FD_STEP * scale
    if np.any(_boundary_clearance(L, p) <= 4.0 * h):
        raise ConfigError("evaluation point too close to a branch boundary")

    c12 = np.asarray(L.curl(p), dtype=float)

    e1 = np.zeros(p.shape)
    e1[..., 0] = h
    e2 = np.zeros(p.shape)
    e2[..., 1] = h
    d1a2 = (L.coefficients(p + e1)[..., 1] - L.coefficients(p - e1)[..., 1]) / (2 * h)
    d2a1 = (L.coefficients(p + e2)[..., 0] - L.coefficients(p - e2)[..., 0]) / (2 * h)
    fd = d1a2 - d2a1
    ref = max(1.0, L.constants.mu * L.omega_scale)
    bad = np.abs(fd - c12) > FD_RTOL * np.maximum(ref, np.abs(c12))
    if np.any(bad):
        worst = float(np.max(np.abs(fd - c12)))
        raise NumericalError(f"closed-form and finite-difference C_12 disagree by {worst:.3e}")

    out = np.zeros(p.shape[:-1] + (2, 2))
    out[..., 0, 1] = c12
    out[..., 1, 0] = -c12
    return out


def degeneracy_tolerance(L: FirstOrderLagrangian) -> float:
    return 1e-10 * L.constants.mu * max(L.omega_scale, 1.0)


def sample_region(L: FirstOrderLagrangian, n: int = 32, seed: int = 0, margin: float = 0.02) -> np.ndarray:
    """Deterministic scrambled-Halton points in the Lagrangian's region, kept off boundaries."""
    cfg = L.config
    sampler = qmc.Halton(d=2, scramble=True, seed=seed)
    if L.provenance is Provenance.CIRCLE_II:
        u = sampler.random(n)
        r = cfg.spectator.radius * (1.0 - margin) * np.sqrt(u[:, 0])
        theta = 2.0 * np.pi * u[:, 1]
        pts = np.asarray(cfg.spectator.center) + np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
    else:
        disks = (cfg.source, cfg.spectator)
        lo = np.min([np.asarray(d.center) - d.radius for d in disks], axis=0)
        hi = np.max([np.asarray(d.center) + d.radius for d in disks], axis=0)
        pad = 0.5 * (hi - lo).max()
        lo, hi = lo - pad, hi + pad
        kept: list[np.ndarray] = []
        count = 0
        while count < n:
            batch = lo + (hi - lo) * sampler.random(4 * n)
            ok = np.ones(len(batch), dtype=bool)
            for prim in cfg.primitives:
                ok &= prim.distance(batch) > prim.radius * (1.0 + margin)
            kept.append(batch[ok])
            count += int(ok.sum())
        pts = np.concatenate(kept)[:n]
    for prim in cfg.primitives:
        near = np.abs(prim.distance(pts) - prim.radius) <= margin * prim.radius
        pts = pts[~near]
    return pts


@dataclass(frozen=True)
class ConstraintReport:
    lagrangian: FirstOrderLagrangian
    constraints: list[str]
    samples: np.ndarray = field(repr=False)
    c12_samples: np.ndarray = field(repr=False)
    classification: Classification
    dirac_x1_x2: float | None
    secondary_status: SecondaryStatus
    note: str = ""

    @property
    def c12(self) -> float:
        """C_12 over the samples; the mean when the samples are not exactly uniform."""
        values = self.c12_samples
        if np.all(values == values[0]):
            return float(values[0])
        return float(np.mean(values))

    def matrix(self, p) -> np.ndarray:
        return constraint_matrix(self.lagrangian, p)


def classify(L: FirstOrderLagrangian, region_samples: Sequence | np.ndarray) -> ConstraintReport:
    samples = np.asarray(region_samples, dtype=float).reshape(-1, 2)
    if len(samples) < MIN_SAMPLES:
        raise ConfigError(f"classify needs at least {MIN_SAMPLES} sample points, got {len(samples)}")
    c12 = constraint_matrix(L, samples)[:, 0, 1]
    tol = degeneracy_tolerance(L)
    nonzero = np.abs(c12) > tol
    if nonzero.all():
        return ConstraintReport(
            lagrangian=L,
            constraints=L.describe_constraints(),
            samples=samples,
            c12_samples=c12,
            classification=Classification.SECOND_CLASS,
            dirac_x1_x2=float(1.0 / (c12[0] if np.all(c12 == c12[0]) else np.mean(c12))),
            secondary_status=SecondaryStatus.NONE_REQUIRED,
            note="constraint matrix invertible; no secondary constraints arise",
        )
    if not nonzero.any():
        return ConstraintReport(
            lagrangian=L,
            constraints=L.describe_constraints(),
            samples=samples,
            c12_samples=c12,
            classification=Classification.DEGENERATE,
            dirac_x1_x2=None,
            secondary_status=SecondaryStatus.DEGENERATE_CHAIN_NOTE,
            note=DEGENERATE_NOTE,
        )
    raise AmbiguousRegionError(
        f"{int(nonzero.sum())} of {len(c12)} samples have nonzero C_12; refine the region"
    )


def require_second_class(report: ConstraintReport) -> None:
    if report.classification is not Classification.SECOND_CLASS:
        raise DegenerateSystemError(
            "degenerate constraint matrix (blind area): the reduced system cannot be quantized"
        )


def dirac_bracket_coordinates(report: ConstraintReport) -> float:
    """{x_1, x_2}_D = 1/C_12, i.e. 1/(mu omega_c) for the reduced circle-II system."""
    require_second_class(report)
    return report.dirac_x1_x2


@dataclass(frozen=True)
class CanonicalPair:
    """q = x_1, p = p_scale * x_2 with p_scale = mu * omega_eff."""

    p_scale: float
    bracket: float


def canonical_pair(report: ConstraintReport) -> CanonicalPair:
    dirac = dirac_bracket_coordinates(report)
    p_scale = report.c12
    return CanonicalPair(p_scale=p_scale, bracket=p_scale * dirac)


def analyze(config: FieldConfiguration, n_samples: int = 32, seed: int = 0) -> ConstraintReport:
    """Build the reduced Lagrangian for the config's receiver region and classify it."""
    L = reduced_lagrangian(config)
    return classify(L, sample_region(L, n_samples, seed))


__all__ = [
    "CanonicalPair",
    "Classification",
    "ConstraintReport",
    "FirstOrderLagrangian",
    "Provenance",
    "SecondaryStatus",
    "analyze",
    "canonical_momenta",
    "canonical_pair",
    "classify",
    "constraint_matrix",
    "degeneracy_tolerance",
    "dirac_bracket_coordinates",
    "reduced_circle_ii",
    "reduced_lagrangian",
    "reduced_region_iii",
    "require_second_class",
    "sample_region",
]
