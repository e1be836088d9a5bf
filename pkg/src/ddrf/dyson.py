"""Time-domain Dyson equation as a Volterra equation of the second kind.

Two solvers are provided: a direct trapezoidal time-march and a windowed
fixed-point (Picard) iteration whose window length is chosen adaptively to
guarantee a contraction factor of at most one half.  The inverse solution
map recovers the reference response from a solved one with the same
quadrature, so the round trip is exact up to roundoff.

Series live either on the full grid (one n x n matrix per step) or in the
reduced transition space: chi(t_m) = Phi @ C_m @ Phi.T * dx with Phi the
transition-density matrix.  The reduced path is the default; the full path
exists for validation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
import scipy.fft

from .errors import (
    IllConditionedStepError,
    InvalidDomainError,
    NoContractionError,
    ShapeMismatchError,
    StepTooLargeError,
    TailNotDampedError,
)
from .kernels import KernelMatrix
from .response import TransitionTable
from .utils import freeze, max_abs

__all__ = [
    "TimeGrid",
    "ReducedBasis",
    "OperatorSeries",
    "chi0_series",
    "coupling_matrix",
    "reduce_to_transition_space",
    "VolterraConfig",
    "dyson_solve_march",
    "dyson_solve_picard",
    "dyson_residual",
    "inverse_map",
    "fourier_transform_series",
    "growth_envelope",
    "write_series",
]

RESOLUTION_FACTOR = 0.2
CONDITION_LIMIT = 1e12
TAIL_EXPONENT = 23.0
CONTRACTION_TARGET = 0.5


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid t_m = m * dt, m = 0..n_steps."""

    dt: float
    n_steps: int

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidDomainError(f"dt must be > 0, got {self.dt}")
        if self.n_steps < 1:
            raise InvalidDomainError("need at least one step")

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)

    @property
    def horizon(self) -> float:
        return self.dt * self.n_steps


@dataclass(frozen=True, eq=False)
class ReducedBasis:
    """Transition-density columns and the quadrature weight of the grid."""

    phi: np.ndarray
    dx: float

    def __post_init__(self):
        object.__setattr__(self, "phi", freeze(self.phi))

    def lift(self, coeff: np.ndarray) -> np.ndarray:
        """Map a P x P coefficient matrix to the full n x n response matrix."""
        return self.phi @ coeff @ self.phi.T * self.dx


@dataclass(frozen=True, eq=False)
class OperatorSeries:
    """Time-sampled operator-valued function, full or reduced."""

    time_grid: TimeGrid
    data: np.ndarray
    representation: str
    basis: Optional[ReducedBasis] = None

    def __post_init__(self):
        if self.representation not in ("full", "reduced"):
            raise InvalidDomainError(f"unknown representation {self.representation!r}")
        if self.representation == "reduced" and self.basis is None:
            raise InvalidDomainError("reduced series needs a basis")
        if self.data.shape[0] != self.time_grid.n_steps + 1:
            raise ShapeMismatchError("series length does not match the time grid")
        object.__setattr__(self, "data", freeze(self.data))

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def at(self, m: int) -> np.ndarray:
        """Full n x n matrix at step m, lifting if reduced."""
        if self.representation == "full":
            return self.data[m]
        return self.basis.lift(self.data[m])

    def to_full(self) -> "OperatorSeries":
        if self.representation == "full":
            return self
        full = np.stack([self.at(m) for m in range(self.data.shape[0])])
        return OperatorSeries(self.time_grid, full, "full")


def coupling_matrix(table: TransitionTable, F: KernelMatrix) -> np.ndarray:
    """Reduced kernel coupling G_pq = <phi_p, F phi_q> in the dx inner product."""
    return table.dx * table.phi.T @ F.matrix @ table.phi


def reduce_to_transition_space(
    table: TransitionTable, F: KernelMatrix, time_grid: TimeGrid
) -> Tuple[np.ndarray, np.ndarray]:
    """Reduced coupling G and reference coefficients D_m = diag(-2 sin(w_p t_m))."""
    if table.size == 0:
        raise InvalidDomainError("transition table is empty")
    G = coupling_matrix(table, F)
    sins = -2.0 * np.sin(np.outer(time_grid.times, table.omegas))
    D = np.zeros((time_grid.n_steps + 1, table.size, table.size))
    idx = np.arange(table.size)
    D[:, idx, idx] = sins
    return G, D


def chi0_series(
    table: TransitionTable, time_grid: TimeGrid, representation: str = "reduced"
) -> OperatorSeries:
    """Reference response sampled on a time grid.

    Enforces the resolution rule dt * omega_max <= 0.2; the series starts at
    the zero matrix because the response kernel vanishes at t = 0.
    """
    if table.size and time_grid.dt * table.omega_max > RESOLUTION_FACTOR:
        raise StepTooLargeError(
            f"dt * omega_max = {time_grid.dt * table.omega_max:.3f} exceeds "
            f"{RESOLUTION_FACTOR}"
        )
    basis = ReducedBasis(table.phi, table.dx)
    sins = -2.0 * np.sin(np.outer(time_grid.times, table.omegas))
    reduced = np.zeros((time_grid.n_steps + 1, table.size, table.size))
    idx = np.arange(table.size)
    reduced[:, idx, idx] = sins
    if representation == "reduced":
        return OperatorSeries(time_grid, reduced, "reduced", basis)
    series = OperatorSeries(time_grid, reduced, "reduced", basis)
    return series.to_full()


@dataclass(frozen=True)
class VolterraConfig:
    """Solver options: method, Picard window, fixed-point control."""

    method: str = "march"
    window_steps: Optional[int] = None
    fixed_point_tol: float = 1e-12
    max_sweeps: int = 200


def _series_coupling(series: OperatorSeries, F: KernelMatrix) -> np.ndarray:
    """Coupling matrix in whichever space the series lives."""
    if series.representation == "full":
        return np.array(F.matrix)
    basis = series.basis
    return basis.dx * basis.phi.T @ F.matrix @ basis.phi


def _self_term_factor(kernel0: np.ndarray, G: np.ndarray, dt: float) -> Optional[np.ndarray]:
    """LHS factor (I - dt/2 K0 G) of the implicit step, or None when explicit."""
    A = 0.5 * dt * kernel0 @ G
    if max_abs(A) == 0.0:
        return None
    T = np.eye(A.shape[0]) - A
    if np.linalg.cond(T) > CONDITION_LIMIT:
        raise IllConditionedStepError("implicit step factor is numerically singular")
    return T


def _convolve_tail(kernel: np.ndarray, E: np.ndarray, m: int) -> np.ndarray:
    """Trapezoid convolution at step m, leaving out the implicit l = m term.

    kernel: stacked K, E: stacked G @ chi values; computes
    0.5 K[m] E[0] + sum_{l=1..m-1} K[m-l] E[l].
    """
    out = 0.5 * kernel[m] @ E[0]
    if m > 1:
        out = out + np.einsum("lij,ljk->ik", kernel[m - 1 : 0 : -1], E[1:m])
    return out


def _trapezoid_convolution(kernel: np.ndarray, E: np.ndarray, dt: float) -> np.ndarray:
    """All trapezoid convolution values at once, via FFT.

    Returns dt * sum''_{l=0..m} kernel[m-l] @ E[l] for every m, computed as
    P^2 scalar linear convolutions batched in frequency space with the
    endpoint-halving corrections applied afterwards.
    """
    L = kernel.shape[0]
    nfft = scipy.fft.next_fast_len(2 * L - 1)
    kf = np.fft.rfft(kernel, nfft, axis=0)
    ef = np.fft.rfft(E, nfft, axis=0)
    lin = np.fft.irfft(np.einsum("fij,fjk->fik", kf, ef), nfft, axis=0)[:L]
    lin -= 0.5 * np.matmul(kernel, E[0])
    lin -= 0.5 * np.matmul(kernel[0], E)
    return dt * lin


def _check_same_grid(series: OperatorSeries, time_grid: Optional[TimeGrid]) -> TimeGrid:
    if time_grid is not None and time_grid != series.time_grid:
        raise InvalidDomainError("explicit time grid disagrees with the series grid")
    return series.time_grid


def dyson_solve_march(
    chi0: OperatorSeries, F: KernelMatrix, time_grid: Optional[TimeGrid] = None
) -> OperatorSeries:
    """Solve chi = chi0 + chi0 * F chi by direct trapezoidal time-marching.

    The equation is solved stepwise; with chi0(0) = 0 every step is explicit,
    otherwise the implicit factor is inverted once and reused (guarded by a
    condition-number check).
    """
    grid = _check_same_grid(chi0, time_grid)
    dt = grid.dt
    K = chi0.data
    G = _series_coupling(chi0, F)
    steps = grid.n_steps
    C = np.zeros_like(K)
    E = np.zeros_like(K)
    C[0] = K[0]
    E[0] = G @ C[0]
    T = _self_term_factor(K[0], G, dt)
    for m in range(1, steps + 1):
        rhs = K[m] + dt * _convolve_tail(K, E, m)
        C[m] = rhs if T is None else np.linalg.solve(T, rhs)
        E[m] = G @ C[m]
    return replace(chi0, data=C)


def dyson_solve_picard(
    chi0: OperatorSeries,
    F: KernelMatrix,
    time_grid: Optional[TimeGrid] = None,
    config: VolterraConfig = VolterraConfig(method="picard"),
) -> OperatorSeries:
    """Solve the Dyson equation by windowed fixed-point iteration.

    The window length is chosen so the estimated Lipschitz constant of the
    convolution map stays below one half; each window is iterated (Jacobi
    sweeps) to the fixed-point tolerance before the solution is extended.
    A window that fails to converge is halved; failure at a single step
    raises NoContractionError.
    """
    grid = _check_same_grid(chi0, time_grid)
    dt = grid.dt
    K = chi0.data
    G = _series_coupling(chi0, F)
    steps = grid.n_steps

    kernel_norm = max(np.linalg.norm(K[m], 2) for m in range(steps + 1))
    coupling_norm = np.linalg.norm(G, 2)
    rate = kernel_norm * coupling_norm
    if config.window_steps is not None:
        window = max(1, int(config.window_steps))
    elif rate == 0.0:
        window = steps
    else:
        window = max(1, int(CONTRACTION_TARGET / (dt * rate)))
    if 0.5 * dt * max_abs(K[0] @ G) >= 1.0:
        raise NoContractionError("single-step self term is not a contraction")

    C = K.copy()
    done = 0
    while done < steps:
        end = min(done + window, steps)
        for _ in range(config.max_sweeps):
            E = np.einsum("ij,ljk->lik", G, C[: end + 1])
            conv = _trapezoid_convolution(K[: end + 1], E, dt)
            block = K[done + 1 : end + 1] + conv[done + 1 : end + 1]
            delta = max_abs(block - C[done + 1 : end + 1])
            C[done + 1 : end + 1] = block
            if delta <= config.fixed_point_tol:
                break
        else:
            if window > 1:
                window = max(1, window // 2)
                continue
            raise NoContractionError(
                "Picard window of one step failed to reach the fixed point"
            )
        done = end
    return replace(chi0, data=C)


def dyson_residual(chi0: OperatorSeries, chi: OperatorSeries, F: KernelMatrix) -> float:
    """Max-norm defect of chi against the discrete Dyson equation of chi0."""
    if chi.representation != chi0.representation or chi.time_grid != chi0.time_grid:
        raise InvalidDomainError("series must share grid and representation")
    dt = chi.time_grid.dt
    K = chi0.data
    C = chi.data
    G = _series_coupling(chi0, F)
    E = np.einsum("ij,ljk->lik", G, C)
    worst = 0.0
    for m in range(chi.time_grid.n_steps + 1):
        conv = _convolve_tail(K, E, m) + 0.5 * K[0] @ E[m] if m else np.zeros_like(K[0])
        defect = C[m] - K[m] - dt * conv
        if chi.representation == "reduced":
            defect = chi.basis.lift(defect)
        worst = max(worst, max_abs(defect))
    return worst


def inverse_map(
    chi: OperatorSeries, F: KernelMatrix, time_grid: Optional[TimeGrid] = None
) -> OperatorSeries:
    """Recover the reference series chi0 from a response series.

    Solves chi0 = chi - chi0 * F chi stepwise, the exact discrete inverse of
    the marching solver under the same trapezoid quadrature.
    """
    grid = _check_same_grid(chi, time_grid)
    dt = grid.dt
    C = chi.data
    G = _series_coupling(chi, F)
    steps = grid.n_steps
    E = np.einsum("ij,ljk->lik", G, C)
    K = np.zeros_like(C)
    K[0] = C[0]
    T = None
    self_term = 0.5 * dt * E[0]
    if max_abs(self_term) > 0.0:
        T = np.eye(C.shape[1]) + self_term
        if np.linalg.cond(T) > CONDITION_LIMIT:
            raise IllConditionedStepError("implicit inverse step factor is singular")
    for m in range(1, steps + 1):
        tail = 0.5 * K[0] @ E[m]
        if m > 1:
            tail = tail + np.einsum("lij,ljk->ik", K[m - 1 : 0 : -1], E[1:m])
        rhs = C[m] - dt * tail
        K[m] = rhs if T is None else np.linalg.solve(T.T, rhs.T).T
    return replace(chi, data=K)


def fourier_transform_series(series: OperatorSeries, z: complex) -> np.ndarray:
    """Trapezoidal transform int_0^T chi(t) exp(izt) dt, lifted to n x n.

    Requires Im(z) * T >= 23 so the truncated tail is below 1e-10 for a
    bounded series, and Im(z) above the fitted exponential growth rate of
    the series (arbitrary user series need not stay bounded; the rate is
    what growth_envelope reports).
    """
    z = complex(z)
    horizon = series.time_grid.horizon
    if z.imag * horizon < TAIL_EXPONENT:
        raise TailNotDampedError(
            f"Im(z) * T = {z.imag * horizon:.2f} < {TAIL_EXPONENT}; "
            "tail is not damped"
        )
    _, rate = growth_envelope(series)
    if z.imag <= rate:
        raise TailNotDampedError(
            f"Im(z) = {z.imag:.3f} is below the fitted growth rate {rate:.3f}"
        )
    weights = np.exp(1j * z * series.time_grid.times)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    acc = np.einsum("l,lij->ij", weights, series.data) * series.time_grid.dt
    if series.representation == "reduced":
        acc = series.basis.phi @ acc @ series.basis.phi.T * series.basis.dx
    return acc


def growth_envelope(series: OperatorSeries) -> Tuple[float, float]:
    """Fit log of the running-max norm envelope to A * exp(rate * t).

    Returns (A, rate).  For response functions with real simple poles the
    envelope is flat and the fitted rate is near zero; the rate is the
    safe lower bound for Im(z) in user-supplied transforms.
    """
    norms = np.array([max_abs(series.data[m]) for m in range(series.data.shape[0])])
    env = np.maximum.accumulate(norms)
    mask = env > 0
    if np.count_nonzero(mask) < 2:
        return 0.0, 0.0
    t = series.time_grid.times[mask]
    loga, rate = np.polyfit(t, np.log(env[mask]), 1)[::-1]
    return float(np.exp(loga)), float(rate)


def write_series(series: OperatorSeries, base_path: str) -> Tuple[str, str]:
    """Export a series as CSV (step,row,col,value) plus a JSON sidecar."""
    csv_path = base_path + ".csv"
    json_path = base_path + ".json"
    data = series.data
    with open(csv_path, "w", newline="") as fh:
        fh.write("step,row,col,value\n")
        for m in range(data.shape[0]):
            for i in range(data.shape[1]):
                for j in range(data.shape[2]):
                    fh.write(f"{m},{i},{j},{repr(float(data[m, i, j]))}\n")
    sidecar = {
        "dt": series.time_grid.dt,
        "n_steps": series.time_grid.n_steps,
        "representation": series.representation,
        "dimension": series.dim,
    }
    with open(json_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path
