"""Uniform 1D grids, one-body Hamiltonians and their spectra.

The model space is a uniform grid with Dirichlet walls just outside the
sampled points; functions are vectors of point values and the inner product
is the dx-weighted dot product.  The kinetic operator is the standard
3-point stencil -(f[i+1] - 2 f[i] + f[i-1]) / (2 dx^2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateFermiLevelError,
    InvalidDomainError,
    NumericalFailureError,
    ShapeMismatchError,
)
from .utils import freeze

__all__ = [
    "UniformGrid",
    "build_grid",
    "Harmonic",
    "Well",
    "SoftCoulombWells",
    "Tabulated",
    "PotentialSpec",
    "potential_on_grid",
    "OneBodyHamiltonian",
    "assemble_hamiltonian",
    "EigenSolution",
    "diagonalize",
    "OrbitalOccupation",
    "validate_occupation",
    "ground_density",
    "BoundaryDecayWarning",
]

SIGN_THRESHOLD = 1e-12
RESIDUAL_TOL = 1e-8
BOUNDARY_DECAY = 1e-8


class BoundaryDecayWarning(UserWarning):
    """Occupied orbital does not decay below tolerance at the walls."""


@dataclass(frozen=True)
class UniformGrid:
    """Uniformly spaced points x_min..x_max inclusive (atomic units)."""

    x_min: float
    x_max: float
    n_points: int

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)


def build_grid(x_min: float, x_max: float, n_points: int) -> UniformGrid:
    """Construct a uniform grid, validating the domain."""
    if n_points < 2:
        raise InvalidDomainError(f"n_points must be >= 2, got {n_points}")
    if not x_min < x_max:
        raise InvalidDomainError(f"need x_min < x_max, got [{x_min}, {x_max}]")
    return UniformGrid(float(x_min), float(x_max), int(n_points))


@dataclass(frozen=True)
class Harmonic:
    """v(x) = k x^2 / 2."""

    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise InvalidDomainError(f"harmonic curvature must be > 0, got {self.k}")

    def values(self, grid: UniformGrid) -> np.ndarray:
        x = grid.points
        return 0.5 * self.k * x * x


@dataclass(frozen=True)
class Well:
    """One soft-Coulomb well charge / sqrt((x-center)^2 + softening^2)."""

    charge: float
    center: float
    softening: float

    def __post_init__(self):
        if not self.softening > 0:
            raise InvalidDomainError(f"softening must be > 0, got {self.softening}")


@dataclass(frozen=True)
class SoftCoulombWells:
    """Sum of soft-Coulomb wells; attractive wells carry negative charge."""

    wells: tuple

    def __post_init__(self):
        object.__setattr__(
            self,
            "wells",
            tuple(w if isinstance(w, Well) else Well(*w) for w in self.wells),
        )

    def values(self, grid: UniformGrid) -> np.ndarray:
        x = grid.points
        v = np.zeros_like(x)
        for w in self.wells:
            v += w.charge / np.sqrt((x - w.center) ** 2 + w.softening**2)
        return v


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Potential given by its point values on the grid."""

    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "table", freeze(np.asarray(self.table, dtype=float)))

    def values(self, grid: UniformGrid) -> np.ndarray:
        if self.table.shape != (grid.n_points,):
            raise ShapeMismatchError(
                f"tabulated potential has length {self.table.shape[0]}, "
                f"grid has {grid.n_points} points"
            )
        return np.array(self.table)


PotentialSpec = Union[Harmonic, SoftCoulombWells, Tabulated]


def potential_on_grid(grid: UniformGrid, pot: PotentialSpec) -> np.ndarray:
    """Evaluate a potential spec on the grid points."""
    v = pot.values(grid)
    if not np.all(np.isfinite(v)):
        raise InvalidDomainError("potential evaluates to non-finite values")
    return v


@dataclass(frozen=True, eq=False)
class OneBodyHamiltonian:
    """Dense symmetric matrix of -Laplacian/2 + v on the grid."""

    matrix: np.ndarray
    grid: UniformGrid

    def __post_init__(self):
        object.__setattr__(self, "matrix", freeze(self.matrix))


def assemble_hamiltonian(grid: UniformGrid, pot: PotentialSpec) -> OneBodyHamiltonian:
    """3-point kinetic stencil with Dirichlet walls plus diagonal potential."""
    n = grid.n_points
    dx = grid.dx
    h = np.zeros((n, n))
    idx = np.arange(n)
    h[idx, idx] = 1.0 / dx**2 + potential_on_grid(grid, pot)
    off = -0.5 / dx**2
    h[idx[:-1], idx[:-1] + 1] = off
    h[idx[:-1] + 1, idx[:-1]] = off
    return OneBodyHamiltonian(h, grid)


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """Full spectrum of a one-body Hamiltonian.

    `eigenvalues` ascending; `eigenvectors` has orbitals as columns,
    orthonormal in the dx-weighted inner product, with a deterministic sign:
    the first component larger than 1e-12 in magnitude is positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    grid: UniformGrid

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", freeze(self.eigenvalues))
        object.__setattr__(self, "eigenvectors", freeze(self.eigenvectors))


def diagonalize(h: OneBodyHamiltonian) -> EigenSolution:
    """Full symmetric eigendecomposition with fixed normalization and sign."""
    try:
        eps, vec = scipy.linalg.eigh(h.matrix)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalFailureError("one-body eigensolver failed") from exc
    dx = h.grid.dx
    vec = vec / np.sqrt(dx)
    for k in range(vec.shape[1]):
        col = vec[:, k]
        nz = np.flatnonzero(np.abs(col) > SIGN_THRESHOLD)
        if nz.size and col[nz[0]] < 0:
            vec[:, k] = -col
    residual = h.matrix @ vec - vec * eps[None, :]
    worst = np.sqrt(dx * np.max(np.sum(residual**2, axis=0)))
    if not worst <= RESIDUAL_TOL:
        raise NumericalFailureError(f"eigenpair residual {worst:.3e} > {RESIDUAL_TOL}")
    return EigenSolution(eps, vec, h.grid)


@dataclass(frozen=True)
class OrbitalOccupation:
    """Occupied/virtual split: N lowest orbitals occupied, next M retained."""

    n_occupied: int
    n_virtual: int
    gap_tol: float = 1e-8


def validate_occupation(eig: EigenSolution, occ: OrbitalOccupation) -> None:
    """Check the split is admissible for this spectrum.

    Raises on an occupied count out of range or a degenerate Fermi level,
    and warns when an occupied orbital has not decayed at the walls (the
    domain is then too small for the bound-state picture to be clean).
    """
    n = eig.eigenvalues.shape[0]
    if occ.n_occupied < 1:
        raise InvalidDomainError("need at least one occupied orbital")
    if occ.n_virtual < 0:
        raise InvalidDomainError("n_virtual must be >= 0")
    if occ.n_occupied + occ.n_virtual > n:
        raise InvalidDomainError(
            f"N + M = {occ.n_occupied + occ.n_virtual} exceeds {n} grid orbitals"
        )
    if occ.n_occupied < n:
        gap = eig.eigenvalues[occ.n_occupied] - eig.eigenvalues[occ.n_occupied - 1]
        if gap <= occ.gap_tol:
            raise DegenerateFermiLevelError(
                f"Fermi gap {gap:.3e} <= gap_tol {occ.gap_tol:.1e}"
            )
    for k in range(occ.n_occupied):
        edge = max(abs(eig.eigenvectors[0, k]), abs(eig.eigenvectors[-1, k]))
        if edge > BOUNDARY_DECAY:
            warnings.warn(
                f"occupied orbital {k} has wall amplitude {edge:.2e}; "
                "enlarge the domain",
                BoundaryDecayWarning,
            )


def ground_density(eig: EigenSolution, n_occupied: int) -> np.ndarray:
    """Density of the Slater determinant of the N lowest orbitals."""
    psi = eig.eigenvectors[:, :n_occupied]
    return np.sum(psi * psi, axis=1)
