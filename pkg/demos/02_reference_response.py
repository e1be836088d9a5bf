# The reference (non-interacting) response function chi0.
#
# chi0 is carried by the occupied-virtual transitions: frequencies
# w_p = eps_a - eps_k and densities phi_p = psi_k psi_a.  This script builds
# the transition table of a harmonic trap, evaluates chi0 in both domains,
# and verifies the two are Fourier transforms of each other.

import numpy as np

from ddrf import (
    Harmonic,
    OrbitalOccupation,
    assemble_hamiltonian,
    build_grid,
    build_transitions,
    chi0_freq,
    chi0_pole_table,
    chi0_time,
    diagonalize,
)

grid = build_grid(-8.0, 8.0, 101)
eig = diagonalize(assemble_hamiltonian(grid, Harmonic(1.0)))
table = build_transitions(eig, OrbitalOccupation(1, 3))

print("transition table (one occupied orbital, three virtuals):")
for pair in table.pairs:
    print(f"  {pair.k} -> {pair.a}: omega = {pair.omega:.6f}")
print("pole table (omega, rank):", chi0_pole_table(table))

# --- static response is attractive (negative semidefinite) ---------------

X0 = chi0_freq(table, 0.0)
eigs = np.linalg.eigvalsh(X0)
print(f"\nchi0(0): largest eigenvalue {eigs[-1]:+.2e} (never positive)")

# --- time kernel starts at zero and oscillates at the gaps ----------------

print("\n<phi_1, chi0(t) phi_1> samples:")
phi1 = table.phi[:, 0]
for t in (0.0, 0.5, 1.5, 3.0):
    val = grid.dx * phi1 @ chi0_time(table, t) @ phi1
    print(f"  t = {t:3.1f}: {val:+.6f}")

# --- quadrature transform of chi0(t) lands on the closed form ------------

z = complex(1.3, 0.6)
horizon = 23.0 / z.imag
dt = 2e-3
times = dt * np.arange(int(round(horizon / dt)) + 1)
weights = np.exp(1j * z * times)
weights[0] *= 0.5
weights[-1] *= 0.5
acc = sum(w * chi0_time(table, t) for w, t in zip(weights, times)) * dt
err = np.max(np.abs(acc - chi0_freq(table, z)))
print(f"\nFourier consistency at z = {z}: max deviation {err:.2e}")
