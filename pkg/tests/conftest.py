"""Shared model fixtures for the test suite."""

import numpy as np
import pytest

from ddrf.grid import (
    Harmonic,
    OrbitalOccupation,
    SoftCoulombWells,
    assemble_hamiltonian,
    build_grid,
    diagonalize,
)
from ddrf.kernels import KernelMatrix, SoftCoulomb, assemble_kernel_matrix, kernel_sqrt
from ddrf.response import build_transitions, transition_table_from_arrays


@pytest.fixture(scope="session")
def harmonic_eig():
    grid = build_grid(-8.0, 8.0, 101)
    return diagonalize(assemble_hamiltonian(grid, Harmonic(1.0)))


@pytest.fixture(scope="session")
def harmonic_table(harmonic_eig):
    return build_transitions(harmonic_eig, OrbitalOccupation(1, 3))


@pytest.fixture(scope="session")
def harmonic_kernel(harmonic_eig):
    F = assemble_kernel_matrix(harmonic_eig.grid, SoftCoulomb(1.0, 0.8))
    return F, kernel_sqrt(F)


@pytest.fixture(scope="session")
def double_well_eig():
    grid = build_grid(-16.0, 16.0, 129)
    pot = SoftCoulombWells(((-1.0, -1.6, 0.7), (-1.0, 1.6, 0.7)))
    return diagonalize(assemble_hamiltonian(grid, pot))


def make_scalar_toy(omega1=1.0, g=0.3, n=41):
    """Single-transition model with an explicitly known coupling.

    Returns (table, F, beta, coupling) where beta is the squared weighted
    norm of the transition density and coupling = <phi, F phi> shifts the
    interacting frequency to sqrt(omega1^2 + 2 omega1 coupling).
    """
    grid = build_grid(-4.0, 4.0, n)
    x = grid.points
    phi = np.exp(-(x**2))
    beta = grid.dx * float(phi @ phi)
    table = transition_table_from_arrays(grid, [omega1], phi[:, None])
    # rank-one kernel aligned with phi: F = (g / beta) * P_phi in the
    # weighted space, so <phi, F phi> = g * beta / beta * ... = g.
    proj = np.outer(phi, phi) * grid.dx / beta
    F = KernelMatrix(proj * g, grid)
    coupling = grid.dx * float(phi @ F.matrix @ phi)
    return table, F, beta, coupling


def make_three_sector(alpha=0.35, n=12):
    """Synthetic model with a rank-2 degenerate group and a tuned coincident pole.

    Three weighted-orthonormal directions carry: two degenerate transitions
    at omega = 2 and one at omega = 1.  The kernel is diagonal in those
    directions with weight alpha on the degenerate pair and beta on the low
    sector, with beta tuned so the projected operator at the degenerate
    frequency has eigenvalue exactly 1: the shared pole survives with rank 1.
    """
    grid = build_grid(0.0, 1.0, n)
    dx = grid.dx
    rng = np.random.default_rng(7)
    raw = rng.standard_normal((n, 3))
    q, _ = np.linalg.qr(raw)
    e = q / np.sqrt(dx)  # dx-orthonormal columns
    omega_low, omega_deg = 1.0, 2.0
    beta = (omega_deg**2 - omega_low**2) / (2.0 * omega_low)
    omegas = [omega_deg, omega_deg, omega_low]
    phi = np.column_stack([e[:, 0], e[:, 1], e[:, 2]])
    table = transition_table_from_arrays(grid, omegas, phi)
    F = KernelMatrix(
        dx * (alpha * (np.outer(e[:, 0], e[:, 0]) + np.outer(e[:, 1], e[:, 1]))
              + beta * np.outer(e[:, 2], e[:, 2])),
        grid,
    )
    return table, F, alpha, beta, (omega_low, omega_deg)
