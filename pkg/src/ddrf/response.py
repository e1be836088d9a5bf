"""Response function of the non-interacting reference system.

All frequency- and time-domain evaluations are exact sums over the retained
occupied-virtual transitions; the truncation to N*M pairs defines the model
rather than approximating an untruncated one.

Matrix convention: an n x n response matrix X acts on a potential vector v
by plain matrix multiplication, X @ v, and already contains the trailing
dx quadrature weight.  Quadratic forms are <f, X g> = dx * f.T @ X @ g.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import AtPoleError, InvalidDomainError
from .grid import EigenSolution, OrbitalOccupation, UniformGrid, validate_occupation
from .utils import freeze, numerical_rank

__all__ = [
    "TransitionPair",
    "DegenerateGroup",
    "TransitionTable",
    "build_transitions",
    "transition_table_from_arrays",
    "chi0_freq",
    "chi0_time",
    "chi0_pole_table",
]

POLE_GUARD = 1e-14
DEFAULT_GROUP_TOL = 1e-9
DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TransitionPair:
    """One occupied-virtual excitation: indices, frequency, density product."""

    k: int
    a: int
    omega: float
    phi: np.ndarray

    def __post_init__(self):
        if not self.omega > 0:
            raise InvalidDomainError(f"transition frequency must be > 0, got {self.omega}")
        object.__setattr__(self, "phi", freeze(self.phi))


@dataclass(frozen=True)
class DegenerateGroup:
    """Pairs whose frequencies agree within the grouping tolerance."""

    indices: tuple
    omega: float
    dim: int


@dataclass(frozen=True, eq=False)
class TransitionTable:
    """Low-rank skeleton of chi0: frequencies and transition densities.

    `omegas` ascending (length P), `phi` of shape (n, P) with one transition
    density per column, and `groups` the degeneracy partition with the
    subspace dimension of each group.
    """

    pairs: tuple
    groups: tuple
    grid: UniformGrid
    omegas: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omegas", freeze(self.omegas))
        object.__setattr__(self, "phi", freeze(self.phi))

    @property
    def dx(self) -> float:
        return self.grid.dx

    @property
    def size(self) -> int:
        return self.omegas.shape[0]

    @property
    def omega_max(self) -> float:
        return float(self.omegas[-1]) if self.size else 0.0


def _group_pairs(
    omegas: np.ndarray, phi: np.ndarray, dx: float, group_tol: float, rank_tol: float
) -> tuple:
    """Chain-group sorted frequencies and compute each group's rank."""
    groups: List[DegenerateGroup] = []
    start = 0
    for p in range(1, omegas.size + 1):
        if p == omegas.size or omegas[p] - omegas[p - 1] > group_tol:
            idx = tuple(range(start, p))
            block = phi[:, start:p] * np.sqrt(dx)
            groups.append(
                DegenerateGroup(
                    indices=idx,
                    omega=float(np.mean(omegas[start:p])),
                    dim=numerical_rank(block, rank_tol),
                )
            )
            start = p
    return tuple(groups)


def build_transitions(
    eig: EigenSolution,
    occ: OrbitalOccupation,
    group_tol: float = DEFAULT_GROUP_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> TransitionTable:
    """Enumerate the N*M occupied-virtual pairs of an eigensolution.

    Pairs are sorted by frequency; near-coincident frequencies (within the
    absolute tolerance `group_tol`) are merged into degeneracy groups whose
    subspace dimension is the numerical rank of the grouped densities.
    """
    validate_occupation(eig, occ)
    n_occ, n_virt = occ.n_occupied, occ.n_virtual
    eps = eig.eigenvalues
    psi = eig.eigenvectors
    records = []
    for k in range(n_occ):
        for a in range(n_occ, n_occ + n_virt):
            records.append((float(eps[a] - eps[k]), k, a))
    records.sort()
    pairs = tuple(
        TransitionPair(k=k, a=a, omega=w, phi=psi[:, k] * psi[:, a])
        for (w, k, a) in records
    )
    omegas = np.array([p.omega for p in pairs])
    phi = (
        np.column_stack([p.phi for p in pairs])
        if pairs
        else np.zeros((eig.grid.n_points, 0))
    )
    groups = _group_pairs(omegas, phi, eig.grid.dx, group_tol, rank_tol)
    return TransitionTable(pairs, groups, eig.grid, omegas, phi)


def transition_table_from_arrays(
    grid: UniformGrid,
    omegas: Sequence[float],
    phi: np.ndarray,
    group_tol: float = DEFAULT_GROUP_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> TransitionTable:
    """Table from explicit frequencies and densities (synthetic models).

    Useful for block models with exact degeneracies that physical grids only
    realize approximately.
    """
    omegas = np.asarray(omegas, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (grid.n_points, omegas.size):
        raise InvalidDomainError(
            f"phi shape {phi.shape} incompatible with {omegas.size} frequencies"
        )
    order = np.argsort(omegas, kind="stable")
    omegas = omegas[order]
    phi = phi[:, order]
    pairs = tuple(
        TransitionPair(k=-1, a=-1, omega=float(w), phi=phi[:, p])
        for p, w in enumerate(omegas)
    )
    groups = _group_pairs(omegas, phi, grid.dx, group_tol, rank_tol)
    return TransitionTable(pairs, groups, grid, omegas, phi)


def chi0_freq(table: TransitionTable, z: complex) -> np.ndarray:
    """Frequency-domain reference response at z.

    Returns sum_p 2 w_p / (z^2 - w_p^2) * phi_p phi_p^T * dx; real symmetric
    for real z away from the poles, complex symmetric otherwise.
    """
    z = complex(z)
    denom = z * z - table.omegas**2
    if table.size and np.min(np.abs(denom)) <= POLE_GUARD:
        raise AtPoleError(f"z = {z} is within {POLE_GUARD} of a transition pole")
    coeff = 2.0 * table.omegas / denom
    if z.imag == 0.0:
        coeff = coeff.real
    out = (table.phi * coeff[None, :]) @ table.phi.T * table.dx
    return out


def chi0_time(table: TransitionTable, t: float) -> np.ndarray:
    """Time-domain reference response, -2 sin(w_p t) on each transition."""
    if t < 0:
        raise InvalidDomainError("time-domain response is defined for t >= 0")
    coeff = -2.0 * np.sin(table.omegas * t)
    return (table.phi * coeff[None, :]) @ table.phi.T * table.dx


def chi0_pole_table(table: TransitionTable) -> List[Tuple[float, int]]:
    """Positive poles of the reference response with their ranks."""
    return [(g.omega, g.dim) for g in table.groups]
