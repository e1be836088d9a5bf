"""Exact two-fermion reference: spectrum, density coupling, response, TDSE.

The two-particle sector of spinless fermions on an n-point grid is spanned
by ordered pairs (i, j), i < j, so its dimension is D = n(n-1)/2.  A state
vector u stores sqrt(2) times the wavefunction values on i < j, which makes
the pair-space inner product dx^2 * u.v equal to the full L^2 one.

The density coupling S maps a pair vector to the grid function
(S u)(x_i) = dx * sum_{j != i} u0[(i,j)] u[(i,j)], with u0 the ground
state; S applied to the ground state itself is the one-body density, and
S* v multiplies a pair amplitude by v_i + v_j.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import (
    AtPoleError,
    DegenerateGroundStateError,
    InvalidDomainError,
    MemoryBudgetError,
    NumericalFailureError,
    StepTooLargeError,
)
from .grid import OneBodyHamiltonian, UniformGrid
from .kernels import InteractionKernel, pair_interaction
from .utils import fit_loglog_slope, freeze, max_abs, numerical_rank

__all__ = [
    "TwoFermionBasis",
    "two_fermion_basis",
    "ManyBodyHamiltonian",
    "build_mb_hamiltonian",
    "ManyBodySpectrum",
    "mb_spectrum",
    "DensityCoupling",
    "density_coupling",
    "spectral_weight_fraction",
    "exact_chi_time",
    "exact_chi_freq",
    "exact_pole_ranks",
    "PerturbationSetup",
    "TimeSeries",
    "tdse_propagate",
    "KuboReport",
    "kubo_check",
]

DEFAULT_D_CAP = 20000
POLE_GUARD = 1e-14
DT_RESOLUTION = 0.1
NORM_DRIFT_TOL = 1e-8
TRUNCATION_WEIGHT_TOL = 1e-6


class SpectralTruncationWarning(UserWarning):
    """Retained states carry too little of the total density coupling weight."""


@dataclass(frozen=True, eq=False)
class TwoFermionBasis:
    """Lexicographic enumeration of ordered pairs (i, j), i < j."""

    n_points: int
    pairs: np.ndarray  # (D, 2) int

    def __post_init__(self):
        object.__setattr__(self, "pairs", freeze(self.pairs))

    @property
    def dim(self) -> int:
        return self.pairs.shape[0]

    def index(self, i: int, j: int) -> int:
        """Position of sorted pair (i, j) in the lexicographic list."""
        if not 0 <= i < j < self.n_points:
            raise InvalidDomainError(f"bad pair ({i}, {j})")
        n = self.n_points
        return i * n - i * (i + 1) // 2 + (j - i - 1)


def two_fermion_basis(n_points: int) -> TwoFermionBasis:
    if n_points < 2:
        raise InvalidDomainError("need at least two grid points for two fermions")
    pairs = np.array([(i, j) for i in range(n_points) for j in range(i + 1, n_points)])
    return TwoFermionBasis(n_points, pairs)


@dataclass(frozen=True, eq=False)
class ManyBodyHamiltonian:
    """Dense symmetric matrix of h (+) h + w on the antisymmetric sector."""

    matrix: np.ndarray
    basis: TwoFermionBasis
    grid: UniformGrid

    def __post_init__(self):
        object.__setattr__(self, "matrix", freeze(self.matrix))


def build_mb_hamiltonian(
    h: OneBodyHamiltonian, w: InteractionKernel, d_cap: int = DEFAULT_D_CAP
) -> ManyBodyHamiltonian:
    """Assemble the two-fermion Hamiltonian with a diagonal pair interaction.

    One-body matrix elements between antisymmetrized pair states follow the
    Slater rules; the interaction is diagonal with value w(x_i - x_j).
    """
    n = h.grid.n_points
    basis = two_fermion_basis(n)
    D = basis.dim
    if D > d_cap:
        raise MemoryBudgetError(f"pair-sector dimension {D} exceeds cap {d_cap}")
    hm = h.matrix
    H = np.zeros((D, D))
    pairs = basis.pairs
    # One-body part: <(i,j)| h(+)h |(k,l)> = h_ik d_jl + h_jl d_ik - h_il d_jk - h_jk d_il
    for p in range(D):
        i, j = pairs[p]
        for k in range(n):
            if k != j:
                a, b = (k, j) if k < j else (j, k)
                sign = 1.0 if k < j else -1.0
                H[p, basis.index(a, b)] += sign * hm[i, k]
            if k != i:
                a, b = (i, k) if i < k else (k, i)
                sign = 1.0 if i < k else -1.0
                H[p, basis.index(a, b)] += sign * hm[j, k]
    x = h.grid.points
    wfun = pair_interaction(w, h.grid)
    H[np.arange(D), np.arange(D)] += wfun(x[pairs[:, 0]] - x[pairs[:, 1]])
    H = 0.5 * (H + H.T)
    return ManyBodyHamiltonian(H, basis, h.grid)


@dataclass(frozen=True, eq=False)
class ManyBodySpectrum:
    """Lowest eigenpairs of the pair-sector Hamiltonian.

    `states` columns are orthonormal in the dx^2-weighted inner product;
    the ground state is checked to be separated from the first excited one,
    and its (automatically bounded) density is recorded with its maximum.
    """

    energies: np.ndarray
    states: np.ndarray
    basis: TwoFermionBasis
    grid: UniformGrid
    ground_density: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "energies", freeze(self.energies))
        object.__setattr__(self, "states", freeze(self.states))
        if self.ground_density is None:
            u0sq = self.grid.dx * self.states[:, 0] ** 2
            rho = np.zeros(self.grid.n_points)
            np.add.at(rho, self.basis.pairs[:, 0], u0sq)
            np.add.at(rho, self.basis.pairs[:, 1], u0sq)
            object.__setattr__(self, "ground_density", rho)
        object.__setattr__(self, "ground_density", freeze(self.ground_density))

    @property
    def max_density(self) -> float:
        return float(np.max(self.ground_density))

    @property
    def n_states(self) -> int:
        return self.energies.shape[0]

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    @property
    def gap(self) -> float:
        return float(self.energies[1] - self.energies[0])

    @property
    def excitation_energies(self) -> np.ndarray:
        return self.energies[1:] - self.energies[0]


def mb_spectrum(
    H: ManyBodyHamiltonian, n_states: int, gap_tol: float = 1e-8
) -> ManyBodySpectrum:
    """Lowest `n_states` eigenpairs, dx^2-orthonormal, deterministic sign."""
    D = H.basis.dim
    if not 2 <= n_states <= D:
        raise InvalidDomainError(f"n_states must be in [2, {D}], got {n_states}")
    try:
        if n_states == D:
            energies, states = scipy.linalg.eigh(H.matrix)
        else:
            energies, states = scipy.linalg.eigh(
                H.matrix, subset_by_index=(0, n_states - 1)
            )
    except scipy.linalg.LinAlgError as exc:
        raise NumericalFailureError("pair-sector eigensolver failed") from exc
    dx = H.grid.dx
    states = states / dx
    for k in range(states.shape[1]):
        nz = np.flatnonzero(np.abs(states[:, k]) > 1e-12)
        if nz.size and states[nz[0], k] < 0:
            states[:, k] = -states[:, k]
    gap = float(energies[1] - energies[0])
    if gap <= gap_tol:
        raise DegenerateGroundStateError(f"ground-state gap {gap:.3e} <= {gap_tol:.1e}")
    return ManyBodySpectrum(energies, states, H.basis, H.grid)


@dataclass(frozen=True, eq=False)
class DensityCoupling:
    """Matrix of the density coupling S: pair space to grid functions."""

    matrix: np.ndarray  # (n, D)
    grid: UniformGrid
    basis: TwoFermionBasis

    def __post_init__(self):
        object.__setattr__(self, "matrix", freeze(self.matrix))

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u

    def adjoint(self, v: np.ndarray, ground: np.ndarray) -> np.ndarray:
        """S* v relative to the stored ground state: (v_i + v_j) * u0."""
        i = self.basis.pairs[:, 0]
        j = self.basis.pairs[:, 1]
        return (v[i] + v[j]) * ground


def density_coupling(spec: ManyBodySpectrum) -> DensityCoupling:
    """Build S from the ground state; S u0 is the one-body density."""
    n = spec.grid.n_points
    basis = spec.basis
    u0 = spec.states[:, 0]
    S = np.zeros((n, basis.dim))
    rows_i = basis.pairs[:, 0]
    rows_j = basis.pairs[:, 1]
    cols = np.arange(basis.dim)
    S[rows_i, cols] = spec.grid.dx * u0
    S[rows_j, cols] += spec.grid.dx * u0
    # The two assignments coincide only if i == j, which the basis excludes.
    coupling = DensityCoupling(S, spec.grid, basis)
    rho = coupling.apply(u0)
    total = spec.grid.dx * float(np.sum(rho))
    if abs(total - 2.0) > 1e-8:
        raise NumericalFailureError(
            f"ground density integrates to {total}, expected 2"
        )
    return coupling


def spectral_weight_fraction(spec: ManyBodySpectrum, S: DensityCoupling) -> float:
    """Fraction of the total excited coupling weight carried by retained states.

    The total over the complete basis is available in closed form through
    completeness, so the truncation error of spectral sums is computable
    without diagonalizing further.
    """
    dx = spec.grid.dx
    amps = S.matrix @ spec.states  # (n, n_states)
    retained = dx * float(np.sum(amps[:, 1:] ** 2))
    total_all = float(np.sum(S.matrix**2)) / dx  # dx * ||S||_F^2 / dx^2
    ground = dx * float(np.sum(amps[:, 0] ** 2))
    total_excited = total_all - ground
    if total_excited <= 0:
        return 1.0
    return retained / total_excited


def _excitation_amplitudes(
    spec: ManyBodySpectrum, S: DensityCoupling, warn: bool = True
) -> Tuple[np.ndarray, np.ndarray]:
    """(omega_j, S psi_j) for the retained excited states."""
    if warn:
        fraction = spectral_weight_fraction(spec, S)
        if 1.0 - fraction > TRUNCATION_WEIGHT_TOL:
            warnings.warn(
                f"retained states carry {fraction:.8f} of the coupling weight; "
                "increase n_states",
                SpectralTruncationWarning,
            )
    omegas = spec.excitation_energies
    amps = S.matrix @ spec.states[:, 1:]
    return omegas, amps


def exact_chi_time(
    spec: ManyBodySpectrum, S: DensityCoupling, t: float
) -> np.ndarray:
    """Exact response at time t >= 0 over the retained spectrum."""
    if t < 0:
        raise InvalidDomainError("response is defined for t >= 0")
    omegas, amps = _excitation_amplitudes(spec, S)
    coeff = -2.0 * np.sin(omegas * t)
    return (amps * coeff[None, :]) @ amps.T * spec.grid.dx


def exact_chi_freq(
    spec: ManyBodySpectrum, S: DensityCoupling, z: complex
) -> np.ndarray:
    """Exact frequency-domain response over the retained spectrum."""
    z = complex(z)
    omegas, amps = _excitation_amplitudes(spec, S)
    denom = z * z - omegas**2
    if omegas.size and np.min(np.abs(denom)) <= POLE_GUARD:
        raise AtPoleError(f"z = {z} is within {POLE_GUARD} of an excitation pole")
    coeff = 2.0 * omegas / denom
    if z.imag == 0.0:
        coeff = coeff.real
    return (amps * coeff[None, :]) @ amps.T * spec.grid.dx


def exact_pole_ranks(
    spec: ManyBodySpectrum,
    S: DensityCoupling,
    group_tol: float = 1e-9,
    dark_tol: float = 1e-10,
    rank_tol: float = 1e-10,
) -> List[Tuple[float, int]]:
    """Positive poles of the exact response with ranks.

    Excited states are grouped by energy within `group_tol`; states whose
    density coupling is below `dark_tol` in norm are dark and excluded; the
    rank of a group is the numerical rank of its stacked coupled densities.
    """
    omegas, amps = _excitation_amplitudes(spec, S, warn=False)
    dx = spec.grid.dx
    records: List[Tuple[float, int]] = []
    start = 0
    for p in range(1, omegas.size + 1):
        if p == omegas.size or omegas[p] - omegas[p - 1] > group_tol:
            block = amps[:, start:p]
            norms = np.sqrt(dx * np.sum(block**2, axis=0))
            bright = block[:, norms > dark_tol]
            if bright.shape[1]:
                rank = numerical_rank(bright * np.sqrt(dx), rank_tol)
                if rank:
                    records.append((float(np.mean(omegas[start:p])), rank))
            start = p
    return records


@dataclass(frozen=True, eq=False)
class PerturbationSetup:
    """Probe/observable potentials, time profile and propagation window."""

    v_probe: np.ndarray
    v_observe: np.ndarray
    profile: Callable[[float], float]
    epsilon: float
    dt: float
    t_max: float

    def __post_init__(self):
        if not self.dt > 0 or not self.t_max >= self.dt:
            raise InvalidDomainError("need dt > 0 and t_max >= dt")
        if not (np.all(np.isfinite(self.v_probe)) and np.all(np.isfinite(self.v_observe))):
            raise InvalidDomainError("probe and observable must be bounded vectors")
        object.__setattr__(self, "v_probe", freeze(self.v_probe))
        object.__setattr__(self, "v_observe", freeze(self.v_observe))


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Expectation value samples from a propagation run."""

    times: np.ndarray
    values: np.ndarray
    norm_drift: float

    def __post_init__(self):
        object.__setattr__(self, "times", freeze(self.times))
        object.__setattr__(self, "values", freeze(self.values))


def _pair_potential_diag(basis: TwoFermionBasis, v: np.ndarray) -> np.ndarray:
    """Diagonal of a one-body potential summed over both particles."""
    return v[basis.pairs[:, 0]] + v[basis.pairs[:, 1]]


def tdse_propagate(
    H: ManyBodyHamiltonian,
    setup: PerturbationSetup,
    spec: Optional[ManyBodySpectrum] = None,
    e_max: Optional[float] = None,
) -> TimeSeries:
    """Crank-Nicolson propagation of the perturbed two-fermion dynamics.

    Starts from the ground state and returns <V_O> at every step.  The
    midpoint Hamiltonian H + eps f(t_m + dt/2) V_P enters the unitary Cayley
    step; when the profile is constant over a step the factorization is
    reused.  Norm drift beyond 1e-8 fails the run.
    """
    if spec is None:
        spec = mb_spectrum(H, 2)
    if e_max is None:
        e_max = float(spec.energies[-1] - spec.energies[0])
    if setup.dt * e_max > DT_RESOLUTION:
        raise StepTooLargeError(
            f"dt * E_max = {setup.dt * e_max:.3f} exceeds {DT_RESOLUTION}"
        )
    basis = H.basis
    dx = H.grid.dx
    vp_diag = _pair_potential_diag(basis, np.asarray(setup.v_probe, dtype=float))
    vo_diag = _pair_potential_diag(basis, np.asarray(setup.v_observe, dtype=float))
    n_steps = int(round(setup.t_max / setup.dt))
    psi = spec.states[:, 0].astype(complex)
    norm0 = dx * dx * float(np.real(np.vdot(psi, psi)))

    values = np.empty(n_steps + 1)
    values[0] = dx * dx * float(np.real(np.vdot(psi, vo_diag * psi)))
    lu = None
    last_f = None
    base = H.matrix
    for m in range(n_steps):
        f_mid = setup.profile((m + 0.5) * setup.dt)
        if lu is None or f_mid != last_f:
            Hm = base + np.diag(setup.epsilon * f_mid * vp_diag)
            A = np.eye(basis.dim, dtype=complex) + 0.5j * setup.dt * Hm
            B = np.eye(basis.dim, dtype=complex) - 0.5j * setup.dt * Hm
            lu = scipy.linalg.lu_factor(A)
            B_cached = B
            last_f = f_mid
        psi = scipy.linalg.lu_solve(lu, B_cached @ psi)
        values[m + 1] = dx * dx * float(np.real(np.vdot(psi, vo_diag * psi)))
    norm_end = dx * dx * float(np.real(np.vdot(psi, psi)))
    drift = abs(norm_end - norm0)
    if drift > NORM_DRIFT_TOL:
        raise NumericalFailureError(f"norm drift {drift:.3e} exceeds {NORM_DRIFT_TOL}")
    times = setup.dt * np.arange(n_steps + 1)
    return TimeSeries(times, values, drift)


@dataclass(frozen=True, eq=False)
class KuboReport:
    """First-order response validation against direct propagation."""

    epsilons: np.ndarray
    max_deviations: np.ndarray
    exponent: float
    relative_first_order: float

    def __post_init__(self):
        object.__setattr__(self, "epsilons", freeze(self.epsilons))
        object.__setattr__(self, "max_deviations", freeze(self.max_deviations))


def _convolve_profile(kernel: np.ndarray, profile_vals: np.ndarray, dt: float) -> np.ndarray:
    """Trapezoid convolution (kernel * f)(t_m) on the propagation grid."""
    n = kernel.shape[0]
    out = np.zeros(n)
    for m in range(1, n):
        w = np.ones(m + 1)
        w[0] = w[-1] = 0.5
        out[m] = dt * float(np.sum(w * kernel[m::-1] * profile_vals[: m + 1]))
    return out


def kubo_check(
    H: ManyBodyHamiltonian,
    spec: ManyBodySpectrum,
    S: DensityCoupling,
    setup: PerturbationSetup,
    epsilons: Sequence[float] = (1e-2, 5e-3, 2.5e-3),
    series: Optional[TimeSeries] = None,
) -> KuboReport:
    """Compare direct propagation with the first-order convolution response.

    The response kernel X(t) = <v_O, chi(t) v_P> comes from the retained
    spectral sum; the deviation of the propagated expectation value from
    <V_O>_0 + eps (X * f)(t) is reported at each probe strength together
    with the fitted scaling exponent (2 for a quadratic remainder).
    """
    omegas, amps = _excitation_amplitudes(spec, S)
    dx = spec.grid.dx
    po = dx * (amps.T @ np.asarray(setup.v_observe, dtype=float))
    pp = dx * (amps.T @ np.asarray(setup.v_probe, dtype=float))
    n_steps = int(round(setup.t_max / setup.dt))
    times = setup.dt * np.arange(n_steps + 1)
    kernel = np.array(
        [-2.0 * float(np.sum(np.sin(omegas * t) * po * pp)) for t in times]
    )
    profile_vals = np.array([setup.profile(t) for t in times])
    first_order = _convolve_profile(kernel, profile_vals, setup.dt)

    devs = []
    for eps in epsilons:
        run = tdse_propagate(
            H,
            PerturbationSetup(
                setup.v_probe, setup.v_observe, setup.profile, eps, setup.dt, setup.t_max
            ),
            spec=spec,
        )
        devs.append(max_abs(run.values - run.values[0] - eps * first_order))
    devs = np.array(devs)
    eps_arr = np.array(epsilons, dtype=float)
    fittable = eps_arr.size >= 2 and np.all(eps_arr > 0) and np.all(devs > 0)
    exponent = fit_loglog_slope(eps_arr, devs) if fittable else 0.0
    scale = max_abs(np.array(epsilons)[0] * first_order)
    relative = devs[0] / scale if scale > 0 else 0.0
    return KuboReport(np.array(epsilons), devs, float(exponent), float(relative))
