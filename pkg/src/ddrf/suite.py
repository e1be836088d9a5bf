"""Bundled model suite: small 1D models exercising every engine.

Ten models mixing harmonic and double-well traps, one and two occupied
orbitals, three to eight virtuals, and both PSD kernel variants.  The suite
backs the randomized structural checks and the acceptance run; models are
deterministic and cheap enough to build in well under a second each.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

from .grid import (
    EigenSolution,
    Harmonic,
    OrbitalOccupation,
    SoftCoulombWells,
    UniformGrid,
    assemble_hamiltonian,
    build_grid,
    diagonalize,
)
from .kernels import (
    DeltaLocal,
    InteractionKernel,
    KernelMatrix,
    KernelSqrt,
    SoftCoulomb,
    assemble_kernel_matrix,
    kernel_sqrt,
)
from .response import TransitionTable, build_transitions

__all__ = ["SuiteModel", "MODEL_SPECS", "bundled_model", "bundled_models"]


@dataclass(frozen=True, eq=False)
class SuiteModel:
    name: str
    grid: UniformGrid
    eig: EigenSolution
    occ: OrbitalOccupation
    table: TransitionTable
    kernel: InteractionKernel
    F: KernelMatrix
    fsqrt: KernelSqrt


def _harmonic(k: float):
    return Harmonic(k)


def _double_well(depth: float = -1.0, half_sep: float = 1.6, soft: float = 0.7,
                 second_depth: float = None):
    wells = (
        (depth, -half_sep, soft),
        (second_depth if second_depth is not None else depth, half_sep, soft),
    )
    return SoftCoulombWells(wells)


# name, (x_min, x_max, n), potential, N, M, kernel
MODEL_SPECS: List[Tuple] = [
    ("harm-n1m3-sc", (-8.0, 8.0, 101), _harmonic(1.0), 1, 3, SoftCoulomb(1.0, 0.8)),
    ("harm-n1m5-dl", (-8.0, 8.0, 101), _harmonic(1.0), 1, 5, DeltaLocal(0.5)),
    ("harm-n2m4-sc", (-8.0, 8.0, 101), _harmonic(1.3), 2, 4, SoftCoulomb(1.5, 1.0)),
    ("harm-n2m6-dl", (-8.0, 8.0, 101), _harmonic(1.0), 2, 6, DeltaLocal(0.3)),
    ("dwell-n1m4-sc", (-16.0, 16.0, 129), _double_well(), 1, 4, SoftCoulomb(1.0, 1.0)),
    ("dwell-n2m5-dl", (-16.0, 16.0, 129), _double_well(-1.2), 2, 5, DeltaLocal(0.4)),
    ("dwell-n2m8-sc", (-16.0, 16.0, 129), _double_well(-1.5, 1.4, 0.6), 2, 8,
     SoftCoulomb(0.8, 0.6)),
    ("harm-n1m8-sc", (-10.0, 10.0, 111), _harmonic(0.5), 1, 8, SoftCoulomb(2.0, 1.2)),
    ("dwell-n1m6-dl", (-16.0, 16.0, 129), _double_well(-1.0, 1.6, 0.7, -0.8), 1, 6,
     DeltaLocal(0.6)),
    ("harm-n2m3-sc", (-8.0, 8.0, 101), _harmonic(1.5), 2, 3, SoftCoulomb(1.2, 0.9)),
]


@lru_cache(maxsize=None)
def bundled_model(index: int) -> SuiteModel:
    """Build (and cache) one suite model by index."""
    name, (x_min, x_max, n), pot, n_occ, n_virt, kernel = MODEL_SPECS[index]
    grid = build_grid(x_min, x_max, n)
    eig = diagonalize(assemble_hamiltonian(grid, pot))
    occ = OrbitalOccupation(n_occ, n_virt)
    table = build_transitions(eig, occ)
    F = assemble_kernel_matrix(grid, kernel)
    return SuiteModel(name, grid, eig, occ, table, kernel, F, kernel_sqrt(F))


def bundled_models() -> List[SuiteModel]:
    """All ten suite models."""
    return [bundled_model(i) for i in range(len(MODEL_SPECS))]
