"""Finite-difference magnetic Schroedinger solver used as an independent check.

The kinetic operator (1/2mu) (p - (q/c) A)^2 is discretized on a square grid
with the five-point stencil and link phases: the hop from node x to its
neighbour y carries exp(-i theta(x->y)) with theta = (q / hbar c) times the
exact line integral of A along the bond.  A pure-gauge change of A then maps
to a diagonal unitary conjugation, so gauge invariance holds to rounding.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigError, NumericalError
from .field_config import FieldConfiguration, Vector2, _as_vector2

MIN_NODES_PER_RADIUS = 16
DENSE_LIMIT = 2000
HERMITICITY_TOL = 1e-14


class ResolutionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Grid2D:
    """Square lattice of spacing h clipped to a disk or box; Dirichlet outside."""

    h: float
    center: Vector2
    half_extent: float
    shape: str = "disk"

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vector2(self.center, "grid center"))
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ConfigError("grid spacing must be positive")
        if self.shape not in ("disk", "box"):
            raise ConfigError(f"unknown grid shape {self.shape!r}")
        if self.half_extent / self.h < MIN_NODES_PER_RADIUS * (1 - 1e-12):
            raise ConfigError(
                f"resolution guard: half-extent / h = {self.half_extent / self.h:.3g} < {MIN_NODES_PER_RADIUS}"
            )

    @classmethod
    def disk(cls, center: Vector2, radius: float, nodes_per_radius: int) -> Grid2D:
        return cls(h=radius / nodes_per_radius, center=center, half_extent=radius, shape="disk")

    @classmethod
    def box(cls, center: Vector2, half_width: float, nodes_per_half_width: int) -> Grid2D:
        return cls(h=half_width / nodes_per_half_width, center=center, half_extent=half_width, shape="box")

    @cached_property
    def _layout(self) -> tuple[np.ndarray, np.ndarray]:
        n = int(math.ceil(self.half_extent / self.h - 1e-9))
        k = np.arange(-n, n + 1)
        kx, ky = np.meshgrid(k, k, indexing="ij")
        off = np.stack([kx, ky], axis=-1) * self.h
        if self.shape == "disk":
            inside = np.hypot(off[..., 0], off[..., 1]) < self.half_extent * (1 - 1e-12)
        else:
            inside = (np.abs(off) < self.half_extent * (1 - 1e-12)).all(axis=-1)
        index = np.full(inside.shape, -1, dtype=np.int64)
        index[inside] = np.arange(int(inside.sum()))
        return index, off + np.asarray(self.center)

    @property
    def index(self) -> np.ndarray:
        """Node index map over the bounding lattice; -1 marks Dirichlet nodes."""
        return self._layout[0]

    @property
    def points(self) -> np.ndarray:
        index, coords = self._layout
        return coords[index >= 0]

    @property
    def size(self) -> int:
        return int((self.index >= 0).sum())

    def bonds(self) -> tuple[np.ndarray, np.ndarray]:
        """Index pairs (i, j) of interior nearest neighbours, j = i + e_x or i + e_y."""
        index = self.index
        pairs = []
        for a, b in ((index[:-1, :], index[1:, :]), (index[:, :-1], index[:, 1:])):
            ok = (a >= 0) & (b >= 0)
            pairs.append(np.stack([a[ok], b[ok]], axis=-1))
        both = np.concatenate(pairs)
        return both[:, 0], both[:, 1]


@dataclass(frozen=True)
class DiscreteHamiltonian:
    matrix: sp.csr_matrix
    grid: Grid2D
    terms: tuple[str, ...]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _hamiltonian_terms(config: FieldConfiguration, include_source_AB: bool):
    named = [("spectator", config.spectator)]
    if include_source_AB:
        named.append(("source", config.source))
    named.extend((f"stray{i}", s) for i, s in enumerate(config.strays))
    return named


def assemble(
    config: FieldConfiguration,
    grid: Grid2D,
    include_source_AB: bool = True,
    extra_terms: Sequence = (),
) -> DiscreteHamiltonian:
    """Hermitian link-phase discretization of (1/2mu) sum_i K_i^2 on the grid.

    ``extra_terms`` are additional potentials exposing ``line_integral(x, y)``,
    e.g. a pure gauge used to test covariance.
    """
    cst = config.constants
    if config.spectator.B != 0:
        ell = cst.magnetic_length(config.spectator.B)
        if ell < 8 * grid.h:
            warnings.warn(
                f"magnetic length {ell:.4g} is under 8 grid spacings (h = {grid.h:.4g})",
                ResolutionWarning,
                stacklevel=2,
            )
    named = _hamiltonian_terms(config, include_source_AB)
    terms = [t for _, t in named] + list(extra_terms)

    n = grid.size
    pts = grid.points
    i, j = grid.bonds()
    theta = np.zeros(len(i))
    for term in terms:
        theta += term.line_integral(pts[i], pts[j])
    theta *= cst.q / (cst.hbar * cst.c)

    t = cst.hbar**2 / (2.0 * cst.mu * grid.h**2)
    hop = -t * np.exp(-1j * theta)
    rows = np.concatenate([np.arange(n), i, j])
    cols = np.concatenate([np.arange(n), j, i])
    vals = np.concatenate([np.full(n, 4.0 * t, dtype=complex), hop, np.conj(hop)])
    H = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    asym = abs(H - H.getH()).max() if n else 0.0
    if asym > HERMITICITY_TOL * 4.0 * t:
        raise NumericalError(f"assembled Hamiltonian is not Hermitian (max |H - H^+| = {asym:.3e})")
    names = tuple(name for name, _ in named) + tuple(f"extra{k}" for k in range(len(extra_terms)))
    return DiscreteHamiltonian(matrix=H, grid=grid, terms=names)


@dataclass(frozen=True)
class Eigenpairs:
    energies: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray


def eigenpairs(H: DiscreteHamiltonian, k: int, tol: float = 1e-8, maxiter: int | None = None) -> Eigenpairs:
    """The k lowest eigenpairs, with residuals ||Hv - lambda v|| for unit v."""
    A = H.matrix
    dim = A.shape[0]
    if k == 0:
        return Eigenpairs(np.zeros(0), np.zeros((dim, 0), dtype=complex), np.zeros(0))
    if k < 0 or k >= dim:
        raise ConfigError(f"requested {k} eigenvalues from a matrix of dimension {dim}")
    if dim <= DENSE_LIMIT:
        w, v = scipy.linalg.eigh(A.toarray(), subset_by_index=(0, k - 1))
    else:
        # positive definite (Dirichlet), so shift-invert about zero targets the bottom
        v0 = np.ones(dim, dtype=complex) / math.sqrt(dim)
        try:
            w, v = spla.eigsh(A, k=k, sigma=0.0, which="LM", v0=v0, tol=1e-13, maxiter=maxiter or 50 * dim)
        except spla.ArpackNoConvergence as exc:
            raise NumericalError(
                f"eigensolver did not converge: {len(exc.eigenvalues)} of {k} pairs found"
            ) from exc
        order = np.argsort(w)
        w, v = w[order], v[:, order]
    v = v / np.linalg.norm(v, axis=0)
    res = np.linalg.norm(A @ v - v * w, axis=0)
    if np.any(res > tol):
        raise NumericalError(f"eigen-residuals above tolerance {tol:g}: max {res.max():.3e}")
    return Eigenpairs(np.asarray(w, dtype=float), v, res)


def lowest_eigenvalues(H: DiscreteHamiltonian, k: int, tol: float = 1e-8) -> np.ndarray:
    return eigenpairs(H, k, tol).energies


def gauge_invariance_check(config: FieldConfiguration, grid: Grid2D, k: int, tol: float = 1e-8) -> float:
    """Max relative shift of the k lowest levels when the source AB term is switched on."""
    on = assemble(config, grid, include_source_AB=True)
    off = assemble(config, grid, include_source_AB=False)
    if k == 0:
        return 0.0
    if (on.matrix != off.matrix).nnz == 0:
        return 0.0
    e_on = lowest_eigenvalues(on, k, tol)
    e_off = lowest_eigenvalues(off, k, tol)
    return float(np.max(np.abs(e_on - e_off) / np.abs(e_off)))


@dataclass(frozen=True)
class PatchReport:
    energies: np.ndarray
    empty_box_energies: np.ndarray
    max_relative_deviation: float
    identical_matrices: bool


def region_iii_spectrum_probe(config: FieldConfiguration, patch: Grid2D, k: int, tol: float = 1e-8) -> PatchReport:
    """Compare a field-free patch with and without the AB exteriors threading past it."""
    if patch.shape != "box":
        raise ConfigError("the region-III probe needs a box patch")
    corners = np.asarray(patch.center) + patch.half_extent * np.array([[-1, -1], [-1, 1], [1, -1], [1, 1]])
    for prim in config.primitives:
        # nearest point of the box to the disk center
        nearest = np.clip(np.asarray(prim.center), corners.min(axis=0), corners.max(axis=0))
        if math.dist(nearest, prim.center) <= prim.radius:
            raise ConfigError("patch intersects a disk; it must lie entirely in the intervening region")
    H = assemble(config, patch, include_source_AB=True)
    empty = FieldConfiguration(
        source=config.source.__class__(config.source.center, config.source.radius, 0.0),
        spectator=config.spectator.__class__(config.spectator.center, config.spectator.radius, 0.0),
        constants=config.constants,
    )
    H0 = assemble(empty, patch, include_source_AB=True)
    identical = (H.matrix != H0.matrix).nnz == 0
    e = lowest_eigenvalues(H, k, tol)
    e0 = lowest_eigenvalues(H0, k, tol)
    dev = float(np.max(np.abs(e - e0) / np.abs(e0))) if k else 0.0
    return PatchReport(e, e0, dev, identical)


class PureGauge:
    """A gradient potential grad(chi); its bond integral is chi(y) - chi(x)."""

    def __init__(self, chi):
        self.chi = chi

    def line_integral(self, x, y) -> np.ndarray:
        return self.chi(np.asarray(y, dtype=float)) - self.chi(np.asarray(x, dtype=float))


def landau_levels(
    energies: np.ndarray,
    hbar_omega: float,
    n_levels: int,
    gap: float = 5e-3,
    min_cluster: int = 3,
) -> np.ndarray:
    """Pick Landau levels out of a hard-wall disk spectrum.

    Bulk states of one level are nearly degenerate while edge states spread
    out between levels, so a level is a run of at least ``min_cluster``
    eigenvalues with successive gaps under ``gap * hbar_omega``; its energy is
    the bottom of the run.
    """
    e = np.sort(np.asarray(energies, dtype=float))
    found: list[float] = []
    i = 0
    while i < len(e) and len(found) < n_levels:
        j = i
        while j + 1 < len(e) and e[j + 1] - e[j] < gap * hbar_omega:
            j += 1
        if j - i + 1 >= min_cluster:
            found.append(e[i])
        i = j + 1
    if len(found) < n_levels:
        raise NumericalError(
            f"only {len(found)} of {n_levels} Landau levels resolved; request more eigenvalues or a stronger field"
        )
    return np.asarray(found)


@dataclass(frozen=True)
class ConvergenceStudy:
    h: np.ndarray
    levels: np.ndarray  # (grids, levels), coarse to fine

    @property
    def deltas(self) -> np.ndarray:
        return np.diff(self.levels, axis=0)

    @property
    def ratios(self) -> np.ndarray:
        d = np.abs(self.deltas)
        return d[:-1] / d[1:]

    @property
    def final(self) -> np.ndarray:
        return self.levels[-1]

    @property
    def final_delta(self) -> np.ndarray:
        return self.deltas[-1] if len(self.levels) > 1 else np.full(self.levels.shape[1], np.nan)

    def second_order(self, min_ratio: float = 3.0) -> bool:
        return bool(np.all(self.ratios >= min_ratio))

    def rows(self) -> list[tuple[float, int, float, float]]:
        """(h, level index, energy, change from the previous grid) per grid and level."""
        out = []
        for g, h in enumerate(self.h):
            for n, energy in enumerate(self.levels[g]):
                delta = self.levels[g, n] - self.levels[g - 1, n] if g else float("nan")
                out.append((float(h), n, float(energy), float(delta)))
        return out


def landau_eigenvalue_count(config: FieldConfiguration, n_levels: int) -> int:
    """Enough eigenvalues to reach the bulk of level n_levels - 1 (flux quanta per level plus edges)."""
    cst = config.constants
    a = config.spectator.radius
    n_phi = cst.q * abs(config.spectator.B) * a**2 / (2.0 * cst.hbar * cst.c)
    return int(math.ceil(n_levels * n_phi)) + 12 * n_levels


def landau_convergence(
    config: FieldConfiguration,
    nodes_per_radius: Sequence[int] = (32, 64, 128),
    n_levels: int = 3,
    include_source_AB: bool = True,
    tol: float = 1e-8,
) -> ConvergenceStudy:
    """Landau levels on successively halved grids over the spectator disk."""
    if n_levels == 0:
        return ConvergenceStudy(np.zeros(0), np.zeros((0, 0)))
    hw = config.constants.hbar * abs(config.constants.omega(config.spectator.B))
    k = landau_eigenvalue_count(config, n_levels)
    hs, levels = [], []
    for npr in nodes_per_radius:
        grid = Grid2D.disk(config.spectator.center, config.spectator.radius, npr)
        with warnings.catch_warnings():
            if npr != nodes_per_radius[-1]:
                warnings.simplefilter("ignore", ResolutionWarning)
            H = assemble(config, grid, include_source_AB)
        e = lowest_eigenvalues(H, min(k, H.dim - 1), tol)
        hs.append(grid.h)
        levels.append(landau_levels(e, hw, n_levels))
    return ConvergenceStudy(np.asarray(hs), np.asarray(levels))


def eigenvalue_convergence(
    config: FieldConfiguration,
    nodes_per_radius: Sequence[int],
    k: int,
    include_source_AB: bool = True,
    tol: float = 1e-8,
) -> ConvergenceStudy:
    """The k lowest eigenvalues on successively refined disk grids."""
    hs, levels = [], []
    for npr in nodes_per_radius:
        grid = Grid2D.disk(config.spectator.center, config.spectator.radius, npr)
        hs.append(grid.h)
        levels.append(lowest_eigenvalues(assemble(config, grid, include_source_AB), k, tol))
    return ConvergenceStudy(np.asarray(hs), np.asarray(levels).reshape(len(hs), k))
