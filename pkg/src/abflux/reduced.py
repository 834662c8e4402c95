"""Quantized reduced oscillator in the spectator disk.

Substituting the constraint solutions p_i = a_i(x) into J_z = x_1 p_2 - x_2 p_1
splits it into a flux-only constant (from the source's exterior potential)
plus (1/omega_eff) times a harmonic oscillator in q = x_1, p = mu omega_eff x_2.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .constraints import ConstraintReport, Provenance, require_second_class
from .errors import AmbiguousRegionError, ConfigError, DegenerateSystemError, NumericalError
from .field_config import FieldConfiguration, PhysicalConstants, ReceiverRegion

CONSISTENCY_RTOL = 1e-12


class TrapSizeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ReducedSystem:
    constants: PhysicalConstants
    omega_eff: float
    J_AB: float

    def energy(self, n):
        """hbar omega_eff (n + 1/2); n may be an integer or an integer array."""
        n = np.asarray(n)
        if np.any(n < 0):
            raise ConfigError("ladder index must be non-negative")
        return self.constants.hbar * self.omega_eff * (n + 0.5)

    def angular_momentum(self, n):
        n = np.asarray(n)
        if np.any(n < 0):
            raise ConfigError("ladder index must be non-negative")
        return self.J_AB + self.constants.hbar * (n + 0.5)

    def energies(self, k: int) -> np.ndarray:
        return self.energy(np.arange(k))

    @property
    def ground_energy(self) -> float:
        return 0.5 * self.constants.hbar * self.omega_eff

    @property
    def zero_point_J(self) -> float:
        return 0.5 * self.constants.hbar + self.J_AB

    @property
    def oscillator_prefactor(self) -> float:
        """The 1/omega_eff multiplying the (q, p) oscillator inside J_z."""
        return 1.0 / self.omega_eff


def flux_angular_momentum(constants: PhysicalConstants, flux: float) -> float:
    """q Phi / (2 pi c)."""
    return constants.q * flux / (2.0 * math.pi * constants.c)


def flux_for_angular_momentum(constants: PhysicalConstants, J: float, n: int = 0) -> float:
    """Source flux that puts rung n of the angular-momentum ladder at J."""
    return (J - constants.hbar * (n + 0.5)) * 2.0 * math.pi * constants.c / constants.q


def source_angular_momentum(config: FieldConfiguration, points) -> np.ndarray:
    """The source exterior's share of eps_ij x_i p_j on the constraint surface.

    Angular momentum is taken about the source center (the origin).
    """
    x = np.asarray(points, dtype=float)
    a = config.constants.coupling * config.source.outside_potential(x)
    return x[..., 0] * a[..., 1] - x[..., 1] * a[..., 0]


def min_trap_radius(constants: PhysicalConstants, B_c: float) -> float:
    if not B_c > 0:
        raise ConfigError(f"spectator field must be positive, got {B_c!r}")
    return math.sqrt(constants.c * constants.hbar / (constants.q * B_c))


def check_trap_size(config: FieldConfiguration) -> bool:
    """Warn (and return False) when the spectator disk is smaller than the lowest orbit."""
    B_c = config.spectator.B
    if B_c <= 0:
        warnings.warn("spectator field is not positive; no trap size bound applies", TrapSizeWarning, stacklevel=2)
        return False
    bound = min_trap_radius(config.constants, B_c)
    if config.spectator.radius < bound:
        warnings.warn(
            f"spectator radius {config.spectator.radius} is below the minimum trap radius {bound}",
            TrapSizeWarning,
            stacklevel=2,
        )
        return False
    return True


def reduce(config: FieldConfiguration, report: ConstraintReport) -> ReducedSystem:
    require_second_class(report)
    if config.receiver_region is not ReceiverRegion.INSIDE_SPECTATOR:
        raise DegenerateSystemError("receiver sits in the intervening region (blind area)")
    L = report.lagrangian
    if L.provenance is not Provenance.CIRCLE_II:
        raise DegenerateSystemError("only the reduced circle-II system can be quantized")
    if not L.gauge_shifted:
        raise ConfigError("spectator potential must be gauge-shifted to the origin before reduction")
    if L.config != config:
        raise ConfigError("constraint report was built for a different configuration")

    c12 = report.c12_samples
    if np.ptp(c12) > CONSISTENCY_RTOL * np.max(np.abs(c12)):
        raise AmbiguousRegionError("C_12 is not uniform over the spectator disk; a stray edge crosses it")
    cst = config.constants
    omega_eff = report.c12 / cst.mu
    if not omega_eff > 0:
        raise DegenerateSystemError("effective cyclotron frequency is not positive")

    J_AB = flux_angular_momentum(cst, config.source.flux)
    constant_term = source_angular_momentum(config, report.samples)
    algebraic = 0.5 * cst.mu * cst.omega(config.source.B) * config.source.radius**2
    scale = max(abs(J_AB), cst.hbar)
    if np.any(np.abs(constant_term - J_AB) > CONSISTENCY_RTOL * scale) or abs(algebraic - J_AB) > CONSISTENCY_RTOL * scale:
        raise NumericalError("reduced angular momentum constant disagrees with q Phi_0 / 2 pi c")
    return ReducedSystem(constants=cst, omega_eff=float(omega_eff), J_AB=float(J_AB))


def noise_response(system: ReducedSystem, stray_uniform_B: float) -> ReducedSystem:
    """Add a uniform stray field over the spectator disk; J_AB is left untouched."""
    if stray_uniform_B == 0:
        return system
    omega = system.omega_eff + system.constants.omega(stray_uniform_B)
    if not omega > 0:
        raise DegenerateSystemError(f"stray field drives omega_eff to {omega}; the reduced oscillator is gone")
    return replace(system, omega_eff=omega)
