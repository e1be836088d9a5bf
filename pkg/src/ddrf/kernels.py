"""Interaction kernels, their quadrature matrices, and PSD square roots.

A kernel matrix acts on potential vectors like the integral operator it
discretizes: entry (i, j) holds K(x_i, x_j) * dx, so that `F @ v`
approximates the convolution of K against v.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.linalg

from .errors import (
    InvalidDomainError,
    NotPositiveSemidefiniteError,
    ShapeMismatchError,
)
from .grid import UniformGrid
from .utils import freeze, max_abs, symmetric_sqrt

__all__ = [
    "SoftCoulomb",
    "DeltaLocal",
    "ZeroKernel",
    "InteractionKernel",
    "KernelMatrix",
    "assemble_kernel_matrix",
    "KernelSqrt",
    "kernel_sqrt",
    "XcKernel",
    "alda_kernel",
    "add_xc",
    "pair_interaction",
]

PSD_TOL = 1e-10
SQRT_RECONSTRUCTION_TOL = 1e-9


@dataclass(frozen=True)
class SoftCoulomb:
    """K(x, y) = strength / sqrt((x-y)^2 + softening^2)."""

    softening: float
    strength: float = 1.0

    def __post_init__(self):
        if not self.softening > 0:
            raise InvalidDomainError(f"softening must be > 0, got {self.softening}")
        if not np.isfinite(self.strength) or self.strength < 0:
            raise InvalidDomainError(f"strength must be finite and >= 0, got {self.strength}")


@dataclass(frozen=True)
class DeltaLocal:
    """Contact interaction strength * delta(x - y)."""

    strength: float

    def __post_init__(self):
        if not np.isfinite(self.strength):
            raise InvalidDomainError("strength must be finite")


@dataclass(frozen=True)
class ZeroKernel:
    """No interaction."""


InteractionKernel = Union[SoftCoulomb, DeltaLocal, ZeroKernel]


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Quadrature-weighted symmetric kernel matrix on a grid.

    `min_eigenvalue` / `max_eigenvalue` are cached at construction; `is_psd`
    applies the relative roundoff tolerance used throughout.
    """

    matrix: np.ndarray
    grid: UniformGrid

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (self.grid.n_points, self.grid.n_points):
            raise ShapeMismatchError(
                f"kernel matrix shape {m.shape} does not match grid size {self.grid.n_points}"
            )
        object.__setattr__(self, "matrix", freeze(m))
        w = scipy.linalg.eigvalsh(self.matrix)
        object.__setattr__(self, "_min_eig", float(w[0]))
        object.__setattr__(self, "_max_eig", float(w[-1]))

    @property
    def min_eigenvalue(self) -> float:
        return self._min_eig

    @property
    def max_eigenvalue(self) -> float:
        return self._max_eig

    @property
    def is_psd(self) -> bool:
        return self._min_eig >= -PSD_TOL * max(self._max_eig, 0.0)


def assemble_kernel_matrix(grid: UniformGrid, kernel: InteractionKernel) -> KernelMatrix:
    """Sample the kernel on the grid and apply the trapezoid-free dx weight.

    The contact kernel needs no quadrature weight: the lattice delta carries
    1/dx which cancels it, leaving strength * identity.
    """
    n = grid.n_points
    if isinstance(kernel, ZeroKernel):
        mat = np.zeros((n, n))
    elif isinstance(kernel, DeltaLocal):
        mat = kernel.strength * np.eye(n)
    elif isinstance(kernel, SoftCoulomb):
        x = grid.points
        diff = x[:, None] - x[None, :]
        mat = kernel.strength / np.sqrt(diff**2 + kernel.softening**2) * grid.dx
    else:
        raise InvalidDomainError(f"unknown kernel variant {type(kernel).__name__}")
    return KernelMatrix(mat, grid)


@dataclass(frozen=True, eq=False)
class KernelSqrt:
    """Symmetric PSD square root S with S @ S == F."""

    matrix: np.ndarray
    grid: UniformGrid

    def __post_init__(self):
        object.__setattr__(self, "matrix", freeze(self.matrix))


def kernel_sqrt(F: KernelMatrix, clip_tol: float = PSD_TOL) -> KernelSqrt:
    """PSD square root by eigendecomposition with roundoff clipping.

    Raises NotPositiveSemidefiniteError when the most negative eigenvalue
    is beyond clip_tol relative to the largest one.
    """
    if F.min_eigenvalue < -clip_tol * max(F.max_eigenvalue, 0.0):
        raise NotPositiveSemidefiniteError(
            f"kernel matrix has eigenvalue {F.min_eigenvalue:.3e} "
            f"(max {F.max_eigenvalue:.3e})"
        )
    s = symmetric_sqrt(F.matrix, clip_tol)
    err = max_abs(s @ s - F.matrix)
    scale = max(max_abs(F.matrix), 1e-300)
    if err > SQRT_RECONSTRUCTION_TOL * scale:
        raise NotPositiveSemidefiniteError(
            f"square-root reconstruction error {err:.3e} exceeds tolerance"
        )
    return KernelSqrt(s, F.grid)


@dataclass(frozen=True, eq=False)
class XcKernel:
    """Adiabatic local kernel: multiplication by e_xc''(rho0) on the grid."""

    diagonal: np.ndarray
    grid: UniformGrid

    def __post_init__(self):
        object.__setattr__(self, "diagonal", freeze(self.diagonal))


def alda_kernel(
    grid: UniformGrid, rho0: np.ndarray, exc2: Callable[[np.ndarray], np.ndarray]
) -> XcKernel:
    """Adiabatic local kernel from a second derivative of e_xc.

    `exc2` maps densities to the curvature of the exchange-correlation
    energy density; it is evaluated pointwise on the ground density.
    """
    rho0 = np.asarray(rho0, dtype=float)
    if rho0.shape != (grid.n_points,):
        raise ShapeMismatchError(
            f"density has length {rho0.shape}, grid has {grid.n_points} points"
        )
    if np.any(rho0 < 0):
        raise InvalidDomainError("density must be nonnegative")
    diag = np.asarray(exc2(rho0), dtype=float)
    if np.isscalar(diag) or diag.ndim == 0:
        diag = np.full(grid.n_points, float(diag))
    if diag.shape != (grid.n_points,):
        raise ShapeMismatchError("exc2 must return a scalar or a grid-length vector")
    if not np.all(np.isfinite(diag)):
        raise InvalidDomainError("exc2 produced non-finite values")
    return XcKernel(diag, grid)


def add_xc(F: KernelMatrix, xc: XcKernel) -> KernelMatrix:
    """Combined kernel F + diagonal xc term.

    The multiplicative kernel g(x) delta(x-y) picks up the same 1/dx
    cancellation as the contact interaction, so the addition is a plain
    diagonal update.  PSD status is re-derived at construction; a combined
    kernel that lost positivity is still usable by the time-domain solvers
    but is rejected by kernel_sqrt.
    """
    if xc.grid != F.grid:
        raise ShapeMismatchError("xc kernel and kernel matrix live on different grids")
    return KernelMatrix(F.matrix + np.diag(xc.diagonal), F.grid)


def pair_interaction(kernel: InteractionKernel, grid: UniformGrid) -> Callable[[np.ndarray], np.ndarray]:
    """Pointwise pair potential w(x_i - x_j) for the two-particle sector.

    The contact interaction vanishes on distinct points, which is exact for
    spinless fermions (the wavefunction vanishes at coincidence anyway).
    """
    if isinstance(kernel, ZeroKernel) or isinstance(kernel, DeltaLocal):
        return lambda diff: np.zeros_like(np.asarray(diff, dtype=float))
    if isinstance(kernel, SoftCoulomb):
        a2 = kernel.softening**2
        lam = kernel.strength
        return lambda diff: lam / np.sqrt(np.asarray(diff, dtype=float) ** 2 + a2)
    raise InvalidDomainError(f"unknown kernel variant {type(kernel).__name__}")
