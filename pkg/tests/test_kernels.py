"""Kernel assembly, square roots, and adiabatic local additions."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddrf.errors import InvalidDomainError, NotPositiveSemidefiniteError
from ddrf.grid import Harmonic, assemble_hamiltonian, build_grid, diagonalize, ground_density
from ddrf.kernels import (
    DeltaLocal,
    KernelMatrix,
    SoftCoulomb,
    ZeroKernel,
    add_xc,
    alda_kernel,
    assemble_kernel_matrix,
    kernel_sqrt,
)


class TestAssembleKernel:
    def test_zero_kernel(self):
        grid = build_grid(-1.0, 1.0, 5)
        F = assemble_kernel_matrix(grid, ZeroKernel())
        assert np.array_equal(F.matrix, np.zeros((5, 5)))

    @given(lam=st.floats(-3, 3, allow_nan=False), n=st.integers(3, 40))
    @settings(max_examples=30, deadline=None)
    def test_delta_local_is_scaled_identity(self, lam, n):
        grid = build_grid(-2.0, 2.0, n)
        F = assemble_kernel_matrix(grid, DeltaLocal(lam))
        assert np.allclose(F.matrix, lam * np.eye(n))

    def test_soft_coulomb_psd(self):
        grid = build_grid(-6.0, 6.0, 61)
        F = assemble_kernel_matrix(grid, SoftCoulomb(1.0, 1.0))
        # numerical eigendecomposition oracle
        eigs = np.linalg.eigvalsh(F.matrix)
        assert eigs[0] >= -1e-10 * eigs[-1]
        assert F.is_psd

    def test_reflection_symmetry_commutes(self):
        grid = build_grid(-5.0, 5.0, 41)
        F = assemble_kernel_matrix(grid, SoftCoulomb(0.8, 1.3))
        R = np.eye(41)[::-1]
        assert np.max(np.abs(R @ F.matrix @ R - F.matrix)) <= 1e-12

    def test_bad_softening(self):
        with pytest.raises(InvalidDomainError):
            SoftCoulomb(0.0, 1.0)


class TestKernelSqrt:
    def test_scaled_identity(self):
        grid = build_grid(0.0, 1.0, 4)
        F = KernelMatrix(4.0 * np.eye(4), grid)
        S = kernel_sqrt(F)
        assert np.allclose(S.matrix, 2.0 * np.eye(4), atol=1e-12)

    def test_projection(self):
        grid = build_grid(0.0, 1.0, 2)
        F = KernelMatrix(np.diag([1.0, 0.0]), grid)
        S = kernel_sqrt(F)
        assert np.allclose(S.matrix, np.diag([1.0, 0.0]), atol=1e-12)

    def test_soft_coulomb_reconstruction(self):
        grid = build_grid(-6.0, 6.0, 81)
        F = assemble_kernel_matrix(grid, SoftCoulomb(1.0, 1.0))
        S = kernel_sqrt(F)
        err = np.max(np.abs(S.matrix @ S.matrix - F.matrix))
        assert err <= 1e-9 * np.max(np.abs(F.matrix))

    def test_rerooting_idempotent(self):
        # For strictly positive definite F, sqrt(S @ S) reproduces S.
        grid = build_grid(-4.0, 4.0, 31)
        F = assemble_kernel_matrix(grid, SoftCoulomb(1.0, 1.0))
        shifted = KernelMatrix(F.matrix + 0.1 * np.eye(31), grid)
        S = kernel_sqrt(shifted)
        S2 = kernel_sqrt(KernelMatrix(S.matrix @ S.matrix, grid))
        assert np.max(np.abs(S2.matrix - S.matrix)) <= 1e-8

    def test_not_psd_rejected(self):
        grid = build_grid(0.0, 1.0, 3)
        F = KernelMatrix(np.diag([1.0, 1.0, -0.5]), grid)
        assert not F.is_psd
        with pytest.raises(NotPositiveSemidefiniteError):
            kernel_sqrt(F)


@pytest.fixture(scope="module")
def trap():
    grid = build_grid(-8.0, 8.0, 81)
    eig = diagonalize(assemble_hamiltonian(grid, Harmonic(1.0)))
    return grid, ground_density(eig, 2)


class TestAldaKernel:
    def test_zero_function_reduces_to_bare_kernel(self, trap):
        grid, rho0 = trap
        xc = alda_kernel(grid, rho0, lambda rho: np.zeros_like(rho))
        assert np.array_equal(xc.diagonal, np.zeros(grid.n_points))
        F = assemble_kernel_matrix(grid, SoftCoulomb(1.0, 1.0))
        assert np.array_equal(add_xc(F, xc).matrix, F.matrix)

    def test_constant_function(self, trap):
        grid, rho0 = trap
        xc = alda_kernel(grid, rho0, lambda rho: 0.7 * np.ones_like(rho))
        assert np.allclose(xc.diagonal, 0.7)

    def test_cube_root_model_entrywise(self, trap):
        # direct evaluation oracle
        grid, rho0 = trap
        xc = alda_kernel(grid, rho0, lambda rho: -np.cbrt(rho))
        assert np.allclose(xc.diagonal, -np.cbrt(rho0))

    def test_psd_addition_preserves_psd(self, trap):
        grid, rho0 = trap
        F = assemble_kernel_matrix(grid, SoftCoulomb(1.0, 1.0))
        xc = alda_kernel(grid, rho0, lambda rho: 0.2 * np.ones_like(rho))
        assert add_xc(F, xc).is_psd

    def test_negative_addition_can_break_psd(self, trap):
        grid, rho0 = trap
        F = assemble_kernel_matrix(grid, SoftCoulomb(1.0, 1.0))
        xc = alda_kernel(grid, rho0, lambda rho: -10.0 * np.ones_like(rho))
        combined = add_xc(F, xc)
        assert not combined.is_psd
        with pytest.raises(NotPositiveSemidefiniteError):
            kernel_sqrt(combined)

    def test_nonfinite_rejected(self, trap):
        grid, rho0 = trap
        with pytest.raises(InvalidDomainError):
            alda_kernel(grid, rho0, lambda rho: np.where(rho > 0, np.inf, 0.0))
