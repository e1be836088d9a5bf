"""Reference response function: transitions, grouping, both domains."""

import numpy as np
import pytest

from ddrf.errors import AtPoleError, InvalidDomainError
from ddrf.grid import OrbitalOccupation, build_grid
from ddrf.response import (
    build_transitions,
    chi0_freq,
    chi0_pole_table,
    chi0_time,
    transition_table_from_arrays,
)


class TestBuildTransitions:
    def test_harmonic_gaps(self):
        from ddrf.grid import Harmonic, assemble_hamiltonian, diagonalize

        grid = build_grid(-10.0, 10.0, 401)
        eig = diagonalize(assemble_hamiltonian(grid, Harmonic(1.0)))
        table = build_transitions(eig, OrbitalOccupation(1, 3))
        assert np.allclose(table.omegas, [1.0, 2.0, 3.0], atol=5e-3)
        assert len(table.groups) == 3
        assert all(g.dim == 1 for g in table.groups)

    def test_single_pair(self, harmonic_eig):
        table = build_transitions(harmonic_eig, OrbitalOccupation(1, 1))
        assert table.size == 1
        assert len(table.groups) == 1
        assert table.groups[0].dim == 1

    def test_pair_count(self, harmonic_eig):
        table = build_transitions(harmonic_eig, OrbitalOccupation(2, 4))
        assert table.size == 8

    def test_double_well_parity_grouping(self, double_well_eig):
        # Tunneling-split transitions from the two lowest (gerade/ungerade)
        # orbitals produce close but distinct frequencies; with a grouping
        # tolerance above the splitting they merge, and the group dimension
        # matches a rank-revealing oracle on the stacked densities.
        table_fine = build_transitions(double_well_eig, OrbitalOccupation(2, 2))
        spread = table_fine.omegas.max() - table_fine.omegas.min()
        table = build_transitions(
            double_well_eig, OrbitalOccupation(2, 2), group_tol=2 * spread
        )
        assert len(table.groups) == 1
        stacked = table.phi * np.sqrt(table.dx)
        assert table.groups[0].dim == np.linalg.matrix_rank(stacked, tol=1e-10)

    def test_transition_densities_are_products(self, harmonic_eig):
        table = build_transitions(harmonic_eig, OrbitalOccupation(1, 2))
        psi = harmonic_eig.eigenvectors
        assert np.allclose(table.phi[:, 0], psi[:, 0] * psi[:, 1])


class TestChi0Freq:
    def test_negative_semidefinite_at_zero(self, harmonic_table):
        X = chi0_freq(harmonic_table, 0.0)
        eigs = np.linalg.eigvalsh(X)
        assert eigs[-1] <= 1e-10

    def test_single_pair_coefficient(self):
        # one pair, omega = 1, normalized phi, dx = 1: coefficient at z = 2i
        # is 2 * 1 / ((2i)^2 - 1) = -2/5.
        grid = build_grid(0.0, 2.0, 3)  # dx = 1
        phi = np.array([1.0, 0.0, 0.0])
        table = transition_table_from_arrays(grid, [1.0], phi[:, None])
        X = chi0_freq(table, 2j)
        assert X[0, 0] == pytest.approx(-2.0 / 5.0, abs=1e-14)

    def test_resolvent_sum_oracle(self, harmonic_eig):
        # Independent brute-force sum over eigenpairs, no TransitionTable.
        occ = OrbitalOccupation(1, 3)
        table = build_transitions(harmonic_eig, occ)
        z = 0.5
        phi1 = table.phi[:, 0]
        dx = harmonic_eig.grid.dx
        eps = harmonic_eig.eigenvalues
        psi = harmonic_eig.eigenvectors
        brute = 0.0
        for k in range(occ.n_occupied):
            for a in range(occ.n_occupied, occ.n_occupied + occ.n_virtual):
                overlap = dx * np.sum(psi[:, k] * phi1 * psi[:, a])
                brute += (
                    1.0 / (eps[k] - eps[a] - z) + 1.0 / (eps[k] - eps[a] + z)
                ) * overlap**2
        quad = dx * phi1 @ chi0_freq(table, z) @ phi1
        assert quad == pytest.approx(brute, rel=1e-12)

    def test_even_in_z(self, harmonic_table):
        rng = np.random.default_rng(3)
        for _ in range(20):
            z = complex(rng.uniform(-3, 3), rng.uniform(0.1, 2))
            assert np.allclose(
                chi0_freq(harmonic_table, z), chi0_freq(harmonic_table, -z), atol=1e-13
            )

    def test_real_symmetric_on_real_axis(self, harmonic_table):
        X = chi0_freq(harmonic_table, 0.4)
        assert X.dtype.kind == "f"
        assert np.max(np.abs(X - X.T)) <= 1e-14

    def test_at_pole_guard(self, harmonic_table):
        with pytest.raises(AtPoleError):
            chi0_freq(harmonic_table, harmonic_table.omegas[0])


class TestChi0Time:
    def test_zero_at_t0(self, harmonic_table):
        assert np.array_equal(
            chi0_time(harmonic_table, 0.0), np.zeros((101, 101))
        )

    def test_single_pair_period(self):
        grid = build_grid(0.0, 2.0, 3)
        phi = np.array([1.0, 0.0, 0.0])
        table = transition_table_from_arrays(grid, [1.0], phi[:, None])
        t = 0.7
        assert chi0_time(table, t)[0, 0] == pytest.approx(-2.0 * np.sin(t), abs=1e-14)
        assert np.allclose(
            chi0_time(table, t), chi0_time(table, t + 2 * np.pi), atol=1e-12
        )

    def test_negative_time_rejected(self, harmonic_table):
        with pytest.raises(InvalidDomainError):
            chi0_time(harmonic_table, -0.1)

    def test_fourier_consistency(self, harmonic_table):
        # quadrature of the time kernel against the closed frequency form
        z = complex(1.3, 0.4)
        horizon = 23.0 / z.imag  # exp(-Im z * T) <= 1e-10
        dt = 2e-3
        steps = int(round(horizon / dt))
        times = dt * np.arange(steps + 1)
        weights = np.exp(1j * z * times)
        weights[0] *= 0.5
        weights[-1] *= 0.5
        acc = np.zeros((101, 101), dtype=complex)
        for w, t in zip(weights, times):
            acc += w * chi0_time(harmonic_table, t)
        acc *= dt
        assert np.max(np.abs(acc - chi0_freq(harmonic_table, z))) <= 1e-6

    def test_low_rank_identity(self, harmonic_table):
        # reduced reconstruction (matrix product) vs direct per-pair summation
        t = 1.3
        direct = np.zeros((101, 101))
        for p in range(harmonic_table.size):
            phi = harmonic_table.phi[:, p]
            direct += (
                -2.0
                * np.sin(harmonic_table.omegas[p] * t)
                * np.outer(phi, phi)
                * harmonic_table.dx
            )
        assert np.max(np.abs(direct - chi0_time(harmonic_table, t))) <= 1e-12

    def test_nsd_below_first_excitation(self, harmonic_table):
        omega1 = harmonic_table.groups[0].omega
        for omega in np.linspace(0.05, 0.95, 7) * omega1:
            eigs = np.linalg.eigvalsh(chi0_freq(harmonic_table, omega))
            assert eigs[-1] <= 1e-10


class TestPoleTable:
    def test_harmonic_n1m3(self, harmonic_table):
        records = chi0_pole_table(harmonic_table)
        assert [r for _, r in records] == [1, 1, 1]
        assert np.allclose([w for w, _ in records], [1.0, 2.0, 3.0], atol=0.05)

    def test_block_model_rank_two(self):
        # Two decoupled wells: same gap, spatially disjoint densities.
        grid = build_grid(0.0, 1.0, 10)
        phi = np.zeros((10, 2))
        phi[2, 0] = 1.0
        phi[7, 1] = 1.0
        table = transition_table_from_arrays(grid, [1.0, 1.0], phi)
        records = chi0_pole_table(table)
        assert records == [(1.0, 2)]
        stacked_rank = np.linalg.matrix_rank(phi)
        assert records[0][1] == stacked_rank

    def test_block_model_rank_one_when_dependent(self):
        grid = build_grid(0.0, 1.0, 10)
        phi = np.zeros((10, 2))
        phi[2, 0] = 1.0
        phi[2, 1] = 2.0
        table = transition_table_from_arrays(grid, [1.0, 1.0], phi)
        assert chi0_pole_table(table) == [(1.0, 1)]

    def test_empty_virtual_space(self, harmonic_eig):
        table = build_transitions(harmonic_eig, OrbitalOccupation(1, 0))
        assert chi0_pole_table(table) == []
