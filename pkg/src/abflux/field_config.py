"""Piecewise gauge-potential geometry: uniform-field disks and their AB exteriors.

Sign convention: the antisymmetric symbol has eps_12 = +1, so for a planar
vector v the contraction (eps_ij v_j) is (v2, -v1).  Points are array-likes
whose last axis has length 2; every evaluator broadcasts over leading axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ConfigError, NumericalError

Vector2 = tuple[float, float]

ORIGIN: Vector2 = (0.0, 0.0)


def eps_contract(v: np.ndarray) -> np.ndarray:
    """Return eps_ij v_j along the last axis."""
    v = np.asarray(v, dtype=float)
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


def _as_points(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.shape[-1:] != (2,):
        raise ConfigError(f"points must have a trailing axis of length 2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError("non-finite evaluation point")
    return arr


def _as_vector2(v, name: str) -> Vector2:
    try:
        x1, x2 = (float(c) for c in v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a pair of numbers") from exc
    if not (math.isfinite(x1) and math.isfinite(x2)):
        raise ConfigError(f"{name} must be finite")
    return (x1, x2)


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    c: float = 1.0
    mu: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "c", "mu", "q"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be a finite positive number, got {value!r}")

    def omega(self, B: float) -> float:
        """Cyclotron frequency qB/(mu c)."""
        return self.q * B / (self.mu * self.c)

    @property
    def coupling(self) -> float:
        """q/c, the factor turning a vector potential into a momentum shift."""
        return self.q / self.c

    def magnetic_length(self, B: float) -> float:
        return math.sqrt(self.hbar * self.c / (self.q * abs(B)))


@dataclass(frozen=True)
class GaugePrimitive:
    """A disk of uniform field B along z, with its AB-type exterior potential."""

    center: Vector2
    radius: float
    B: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vector2(self.center, "center"))
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ConfigError(f"radius must be finite and positive, got {self.radius!r}")
        if not math.isfinite(self.B):
            raise ConfigError("field strength must be finite")
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "B", float(self.B))

    @property
    def flux(self) -> float:
        return math.pi * self.radius**2 * self.B

    def distance(self, p) -> np.ndarray:
        d = _as_points(p) - np.asarray(self.center)
        return np.hypot(d[..., 0], d[..., 1])

    def contains(self, p) -> np.ndarray:
        """True where the inside (symmetric-gauge) branch applies."""
        return self.distance(p) < self.radius

    def inside_potential(self, p) -> np.ndarray:
        d = _as_points(p) - np.asarray(self.center)
        return -0.5 * self.B * eps_contract(d)

    def outside_potential(self, p) -> np.ndarray:
        d = _as_points(p) - np.asarray(self.center)
        rho2 = d[..., 0] ** 2 + d[..., 1] ** 2
        return -0.5 * self.B * self.radius**2 * eps_contract(d) / rho2[..., None]

    def potential(self, p) -> np.ndarray:
        p = _as_points(p)
        d = p - np.asarray(self.center)
        rho2 = d[..., 0] ** 2 + d[..., 1] ** 2
        inside = rho2 < self.radius**2
        # rho2 can only vanish inside, where the outside factor is discarded
        scale = np.where(inside, 1.0, self.radius**2 / np.where(inside, 1.0, rho2))
        return -0.5 * self.B * eps_contract(d) * scale[..., None]

    def curl(self, p) -> np.ndarray:
        return np.where(self.contains(p), self.B, 0.0)

    def line_integral(self, x, y) -> np.ndarray:
        """Exact integral of the branch-selected potential along segments x -> y.

        Segments are split where they cross the boundary circle.  On the inside
        branch the potential is linear, so the midpoint rule is exact; outside
        it equals (flux / 2 pi) grad(angle), so the integral is a wrapped angle
        difference.
        """
        x = _as_points(x)
        y = _as_points(y)
        c = np.asarray(self.center)
        d = y - x
        f = x - c
        aa = np.einsum("...i,...i->...", d, d)
        bb = 2.0 * np.einsum("...i,...i->...", f, d)
        cc = np.einsum("...i,...i->...", f, f) - self.radius**2
        disc = bb**2 - 4.0 * aa * cc
        root = np.sqrt(np.where(disc > 0, disc, 0.0))
        safe = np.where(aa > 0, aa, 1.0)
        t1 = np.clip((-bb - root) / (2.0 * safe), 0.0, 1.0)
        t2 = np.clip((-bb + root) / (2.0 * safe), 0.0, 1.0)
        cuts = [np.zeros_like(aa), t1, t2, np.ones_like(aa)]
        total = np.zeros_like(aa)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            a = x + lo[..., None] * d
            b = x + hi[..., None] * d
            mid = 0.5 * (a + b)
            inside = np.hypot(mid[..., 0] - c[0], mid[..., 1] - c[1]) < self.radius
            lin = np.einsum("...i,...i->...", self.inside_potential(mid), b - a)
            pa, pb = a - c, b - c
            # signed angle from pa to pb, in (-pi, pi]
            dphi = np.arctan2(pa[..., 0] * pb[..., 1] - pa[..., 1] * pb[..., 0], np.einsum("...i,...i->...", pa, pb))
            ab = 0.5 * self.B * self.radius**2 * dphi
            seg = np.where(inside, lin, ab)
            total = total + np.where(hi > lo, seg, 0.0)
        return total


@dataclass(frozen=True)
class SymmetricGauge:
    """Uniform-field potential -B eps_ij (x_j - origin_j)/2 over the whole plane."""

    B: float
    origin: Vector2 = ORIGIN

    def potential(self, p) -> np.ndarray:
        d = _as_points(p) - np.asarray(self.origin)
        return -0.5 * self.B * eps_contract(d)

    def curl(self, p) -> np.ndarray:
        return np.full(np.shape(p)[:-1], float(self.B))

    def line_integral(self, x, y) -> np.ndarray:
        x = _as_points(x)
        y = _as_points(y)
        return np.einsum("...i,...i->...", self.potential(0.5 * (x + y)), y - x)


class ReceiverRegion(str, Enum):
    INSIDE_SPECTATOR = "InsideSpectator"
    INTERVENING = "InterveningRegion"


@dataclass(frozen=True)
class FieldConfiguration:
    """Source disk (circle I) at the origin, spectator disk (circle II) and strays."""

    source: GaugePrimitive
    spectator: GaugePrimitive
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    strays: tuple[GaugePrimitive, ...] = ()
    receiver_region: ReceiverRegion = ReceiverRegion.INSIDE_SPECTATOR

    def __post_init__(self):
        object.__setattr__(self, "strays", tuple(self.strays))
        object.__setattr__(self, "receiver_region", ReceiverRegion(self.receiver_region))
        if self.source.center != ORIGIN:
            raise ConfigError("the source disk must be centered at the origin")
        gap = math.dist(self.source.center, self.spectator.center)
        if not gap > self.source.radius + self.spectator.radius:
            raise ConfigError(
                f"disks overlap: center distance {gap} must exceed a_0 + a_c = "
                f"{self.source.radius + self.spectator.radius}"
            )
        for stray in self.strays:
            if stray.center == self.source.center and stray.radius == self.source.radius:
                raise ConfigError("a stray disk may not replicate the source geometry")

    @property
    def x_C(self) -> float:
        return math.dist(self.source.center, self.spectator.center)

    @property
    def primitives(self) -> tuple[GaugePrimitive, ...]:
        return (self.source, self.spectator, *self.strays)

    @property
    def receiver_point(self) -> Vector2:
        if self.receiver_region is ReceiverRegion.INSIDE_SPECTATOR:
            return self.spectator.center
        # midpoint of the gap between the two circles on the line joining them
        c = np.asarray(self.spectator.center)
        u = c / np.linalg.norm(c)
        mid = 0.5 * (self.source.radius + np.linalg.norm(c) - self.spectator.radius)
        return tuple(float(v) for v in mid * u)

    def in_region_iii(self, p) -> np.ndarray:
        return ~self.source.contains(p) & ~self.spectator.contains(p)

    def with_source_B(self, B: float) -> FieldConfiguration:
        return replace(self, source=replace(self.source, B=B))

    def with_source_flux(self, flux: float) -> FieldConfiguration:
        return self.with_source_B(flux / (math.pi * self.source.radius**2))

    def with_strays(self, strays: Sequence[GaugePrimitive]) -> FieldConfiguration:
        return replace(self, strays=tuple(strays))


def vector_potential_at(primitive: GaugePrimitive, p, constants: PhysicalConstants | None = None) -> np.ndarray:
    """Branch-selected potential of one primitive (outside branch for distance >= radius)."""
    return primitive.potential(p)


def magnetic_field_at(primitive: GaugePrimitive, p) -> np.ndarray:
    return primitive.curl(p)


def total_potential_at(config: FieldConfiguration, p) -> np.ndarray:
    total = np.zeros(np.shape(_as_points(p)))
    for prim in config.primitives:
        total = total + prim.potential(p)
    return total


def enclosed_flux(config: FieldConfiguration, loop_center, loop_radius: float) -> float:
    """Analytic flux through a circle; every disk must be fully inside or fully outside."""
    total = 0.0
    for prim in config.primitives:
        d = math.dist(prim.center, loop_center)
        if d + prim.radius <= loop_radius:
            total += prim.flux
        elif d >= loop_radius + prim.radius:
            continue
        elif d + loop_radius <= prim.radius:
            # loop lies inside the disk: Stokes over the loop area
            total += math.pi * loop_radius**2 * prim.B
        else:
            raise ConfigError("loop crosses a disk boundary")
    return total


def loop_integral(
    config: FieldConfiguration,
    loop_center,
    loop_radius: float,
    n_quadrature: int = 64,
    rtol: float = 1e-9,
    max_nodes: int = 2**20,
) -> float:
    """Line integral of the total potential around a circle, counter-clockwise.

    Composite trapezoid rule, doubling the node count until successive values
    agree to ``rtol``.  Loops crossing a disk boundary are rejected since the
    integrand then loses smoothness.
    """
    center = np.asarray(_as_vector2(loop_center, "loop_center"))
    if not loop_radius > 0:
        raise ConfigError("loop radius must be positive")
    for prim in config.primitives:
        d = math.dist(prim.center, center)
        slack = 1e-9 * max(loop_radius, prim.radius)
        if abs(d - loop_radius) - slack <= prim.radius <= d + loop_radius + slack:
            raise ConfigError("loop crosses or touches a disk boundary")
    scale = sum(abs(p.flux) for p in config.primitives) or 1.0

    def trapezoid(n: int) -> float:
        theta = 2.0 * np.pi * np.arange(n) / n
        tangent = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
        pts = center + loop_radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        integrand = np.einsum("ij,ij->i", total_potential_at(config, pts), tangent)
        return float(integrand.sum() * loop_radius * 2.0 * np.pi / n)

    n = max(int(n_quadrature), 4)
    prev = trapezoid(n)
    while n < max_nodes:
        n *= 2
        cur = trapezoid(n)
        if abs(cur - prev) <= rtol * max(abs(cur), scale):
            return cur
        prev = cur
    raise NumericalError(f"loop integral did not converge within {max_nodes} nodes")


@dataclass(frozen=True)
class GaugeShift:
    """Result of moving a spectator's inside branch to the coordinate origin."""

    shifted: SymmetricGauge
    chi_gradient: Vector2
    center: Vector2

    def chi(self, p) -> np.ndarray:
        """chi = -B eps_ij x_i c_j / 2."""
        x = _as_points(p)
        c1, c2 = self.center
        return -0.5 * self.shifted.B * (x[..., 0] * c2 - x[..., 1] * c1)

    def reconstruct(self, p) -> np.ndarray:
        """Original inside-branch potential, recovered as shifted - grad chi."""
        return self.shifted.potential(p) - np.asarray(self.chi_gradient)


def gauge_shift_to_center(primitive: GaugePrimitive) -> GaugeShift:
    """Remove the constant term B eps_ij c_j / 2 from a primitive's inside branch."""
    c = np.asarray(primitive.center)
    grad = -0.5 * primitive.B * eps_contract(c)
    return GaugeShift(
        shifted=SymmetricGauge(B=primitive.B, origin=ORIGIN),
        chi_gradient=(float(grad[0]) + 0.0, float(grad[1]) + 0.0),
        center=primitive.center,
    )
