"""Frequency-domain engine for the interacting response function.

The pole analysis runs on the symmetrized operator chi_s(z) =
F^{1/2} chi0(z) F^{1/2}.  Its positive eigenvalue curves decrease
monotonically between consecutive reference excitations, so crossings of
the level mu = 1 (the interacting poles away from reference poles) are
found robustly by per-curve bisection.  A Casida-type eigenvalue problem
gives all candidate frequencies globally, and contour integration of the
resolvent (1 - chi_s)^{-1} provides an independent rank count.

Rank conventions: at an interior pole the rank is the multiplicity of the
eigenvalue 1 of chi_s(omega); at a pole shared with the reference response
the rank is the multiplicity of the eigenvalue 1 of the projected,
pole-subtracted operator (group terms removed analytically, projector onto
the orthogonal complement of the group's symmetrized densities).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import (
    AtPoleError,
    BisectionLimitError,
    ContourHitsPoleError,
    IntervalContainsPoleError,
    InvalidDomainError,
    NotPositiveSemidefiniteError,
    NumericalFailureError,
    QuadratureNotConvergedError,
    SingularResolventError,
)
from .kernels import KernelMatrix, KernelSqrt
from .response import TransitionTable, chi0_freq
from .utils import max_abs, orthonormal_basis, symmetric_sqrt

__all__ = [
    "SymmetrizedEval",
    "symmetrized",
    "chi_s",
    "casida_matrix",
    "EigenCurveScan",
    "eig_curves",
    "ScanConfig",
    "PoleRecord",
    "find_pole_crossings",
    "rank_at_coincident_pole",
    "riesz_rank",
    "contour_residue",
    "contour_locate",
    "chi_rpa_freq",
    "rpa_pole_table",
    "ShiftReport",
    "forward_shift_report",
    "default_shift_samples",
    "counting_bookkeeping",
    "PropertyReport",
    "property_checks",
    "poles_to_csv",
    "poles_to_json",
    "scan_to_csv",
    "shift_report_to_csv",
    "shift_report_to_json",
]

POLE_GUARD = 1e-14
EIG1_TOL = 1e-8
BISECTION_TOL = 1e-10
DEFAULT_PADDING = 1e-6
MONOTONE_TOL = 1e-9
CONDITION_LIMIT = 1e12
RESIDUE_FLOOR = 1e-8
SV_CLUSTER = 0.5
QUAD_STABLE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SymmetrizedEval:
    """Precomputed data for evaluating chi_s fast.

    `amplitudes` holds the symmetrized transition densities F^{1/2} phi_p as
    columns; `coupling` is their Gram matrix in the dx inner product, whose
    square root conjugates the diagonal resolvent coefficients into the
    spectrum-equivalent reduced form.
    """

    table: TransitionTable
    fsqrt: KernelSqrt
    amplitudes: np.ndarray
    coupling: np.ndarray
    coupling_sqrt: np.ndarray

    def coefficients(self, z: complex) -> np.ndarray:
        z = complex(z)
        denom = z * z - self.table.omegas**2
        if self.table.size and np.min(np.abs(denom)) <= POLE_GUARD:
            raise AtPoleError(f"z = {z} is within {POLE_GUARD} of a reference pole")
        coeff = 2.0 * self.table.omegas / denom
        return coeff.real if z.imag == 0.0 else coeff

    def full(self, z: complex) -> np.ndarray:
        """chi_s(z) as an n x n matrix."""
        coeff = self.coefficients(z)
        return (self.amplitudes * coeff[None, :]) @ self.amplitudes.T * self.table.dx

    def reduced(self, z: complex) -> np.ndarray:
        """P x P matrix with the same nonzero spectrum as chi_s(z)."""
        coeff = self.coefficients(z)
        return self.coupling_sqrt @ (coeff[:, None] * self.coupling_sqrt)

    def eigenvalues(self, omega: float) -> np.ndarray:
        """Descending eigenvalues of the reduced form at a real frequency."""
        return scipy.linalg.eigvalsh(self.reduced(omega))[::-1]

    def counting(self, omega: float, mu0: float = 1.0) -> int:
        """Number of eigenvalues of chi_s(omega) above mu0."""
        return int(np.count_nonzero(self.eigenvalues(omega) > mu0))

    def quadratic_form(self, f: np.ndarray, z: complex) -> complex:
        """<f, chi_s(z) f> in the dx-weighted inner product."""
        coeff = self.coefficients(z)
        proj = self.amplitudes.T @ f
        return complex(self.table.dx**2 * np.sum(coeff * proj * proj))


def symmetrized(table: TransitionTable, fsqrt: KernelSqrt) -> SymmetrizedEval:
    """Build the evaluation cache for chi_s from a table and kernel root."""
    amplitudes = fsqrt.matrix @ table.phi
    coupling = table.dx * amplitudes.T @ amplitudes
    coupling_sqrt = symmetric_sqrt(coupling)
    return SymmetrizedEval(table, fsqrt, amplitudes, coupling, coupling_sqrt)


def chi_s(table: TransitionTable, fsqrt: KernelSqrt, z: complex) -> np.ndarray:
    """Literal recipe F^{1/2} chi0(z) F^{1/2} (validation path)."""
    return fsqrt.matrix @ chi0_freq(table, z) @ fsqrt.matrix


def casida_matrix(
    table: TransitionTable, F: KernelMatrix
) -> Tuple[np.ndarray, np.ndarray]:
    """Transition-space eigenvalue problem for the interacting frequencies.

    Returns the symmetric matrix w_p^2 delta_pq + 2 sqrt(w_p) G_pq sqrt(w_q)
    and the square roots of its (nonnegative) eigenvalues, the candidate
    interacting pole frequencies.
    """
    if not F.is_psd:
        raise NotPositiveSemidefiniteError(
            "Casida construction requires a PSD kernel"
        )
    G = table.dx * table.phi.T @ F.matrix @ table.phi
    roots = np.sqrt(table.omegas)
    omega_sq = np.diag(table.omegas**2) + 2.0 * (roots[:, None] * G * roots[None, :])
    eigs = scipy.linalg.eigvalsh(omega_sq)
    return omega_sq, np.sqrt(np.clip(eigs, 0.0, None))


@dataclass(frozen=True, eq=False)
class EigenCurveScan:
    """Sampled descending eigenvalue curves on one excitation-free interval."""

    omegas: np.ndarray
    eigenvalues: np.ndarray  # shape (n_samples, P), descending per row
    monotone: tuple  # per tracked curve, positive part only

    def counting(self, mu0: float = 1.0) -> np.ndarray:
        return np.count_nonzero(self.eigenvalues > mu0, axis=1)


def eig_curves(
    table: TransitionTable,
    fsqrt: KernelSqrt,
    interval: Tuple[float, float],
    n_samples: int,
    monotone_tol: float = MONOTONE_TOL,
) -> EigenCurveScan:
    """Sample the eigenvalue curves of chi_s on an excitation-free interval."""
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise InvalidDomainError("interval must have positive length")
    if n_samples < 2:
        raise InvalidDomainError("need at least two samples")
    for g in table.groups:
        if lo - 1e-8 < g.omega < hi + 1e-8:
            raise IntervalContainsPoleError(
                f"reference pole at {g.omega} inside scan interval ({lo}, {hi})"
            )
    sym = symmetrized(table, fsqrt)
    omegas = np.linspace(lo, hi, n_samples)
    eigs = np.stack([sym.eigenvalues(w) for w in omegas])
    flags = []
    for i in range(eigs.shape[1]):
        curve = eigs[:, i]
        relevant = curve[:-1] > monotone_tol
        flags.append(bool(np.all(np.diff(curve)[relevant] <= monotone_tol)))
    return EigenCurveScan(omegas, eigs, tuple(flags))


@dataclass(frozen=True)
class ScanConfig:
    """Options for the crossing search."""

    omega_min: Optional[float] = None
    omega_max: Optional[float] = None
    n_samples: int = 64
    padding: float = DEFAULT_PADDING
    bisection_tol: float = BISECTION_TOL
    eig1_tol: float = EIG1_TOL
    max_bisection_iterations: int = 200
    max_refinements: int = 3


@dataclass(frozen=True)
class PoleRecord:
    """One located pole of the interacting response."""

    omega: float
    rank: int
    kind: str  # "interior" or "coincident"
    method: str  # "bisection", "casida" or "contour"
    residue_norm: Optional[float] = None


def _upper_scan_bound(sym: SymmetrizedEval, padding: float) -> float:
    """Frequency above which no eigenvalue of chi_s can reach 1.

    Above the largest reference pole every coefficient is positive and
    bounded by 2 w_max / (w^2 - w_max^2), so the largest eigenvalue is below
    lambda_max(G) times that factor; solving for the crossing of 1 bounds
    the search.
    """
    w_max = sym.table.omega_max
    lam = float(scipy.linalg.eigvalsh(sym.coupling)[-1]) if sym.table.size else 0.0
    lam = max(lam, 0.0)
    bound = np.sqrt(w_max**2 + 2.0 * w_max * lam)
    return bound * (1.0 + 1e-4) + 10.0 * padding


def _bisect_curve(
    sym: SymmetrizedEval,
    curve: int,
    lo: float,
    hi: float,
    tol: float,
    max_iter: int,
) -> float:
    """Bisection for the i-th descending eigenvalue crossing 1 on (lo, hi)."""
    f_lo = sym.eigenvalues(lo)[curve] - 1.0
    f_hi = sym.eigenvalues(hi)[curve] - 1.0
    if not (f_lo > 0.0 >= f_hi):
        raise NumericalFailureError("bisection bracket lost its sign change")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            return mid
        if sym.eigenvalues(mid)[curve] - 1.0 > 0.0:
            lo = mid
        else:
            hi = mid
    raise BisectionLimitError(
        f"bisection did not reach tolerance {tol} in {max_iter} iterations"
    )


def _interval_crossings(
    sym: SymmetrizedEval, lo: float, hi: float, scan: ScanConfig
) -> List[float]:
    """All crossings of mu_i(omega) = 1 inside [lo, hi], with refinement.

    The number of located crossings is checked against the drop of the
    counting function across the interval; a mismatch triggers sample
    refinement and finally a hard failure (never silently resolved).
    """
    n_samples = max(scan.n_samples, 8)
    for _ in range(scan.max_refinements + 1):
        omegas = np.linspace(lo, hi, n_samples)
        eigs = np.stack([sym.eigenvalues(w) for w in omegas])
        expected = int(
            np.count_nonzero(eigs[0] > 1.0) - np.count_nonzero(eigs[-1] > 1.0)
        )
        crossings: List[float] = []
        for i in range(eigs.shape[1]):
            curve = eigs[:, i] - 1.0
            for s in range(len(omegas) - 1):
                if curve[s] > 0.0 >= curve[s + 1]:
                    crossings.append(
                        _bisect_curve(
                            sym,
                            i,
                            omegas[s],
                            omegas[s + 1],
                            scan.bisection_tol,
                            scan.max_bisection_iterations,
                        )
                    )
        if len(crossings) == expected:
            return crossings
        n_samples *= 2
    raise NumericalFailureError(
        f"located {len(crossings)} crossings in ({lo}, {hi}) but counting "
        f"function predicts {expected}; model pathology"
    )


def find_pole_crossings(
    table: TransitionTable, fsqrt: KernelSqrt, scan: ScanConfig = ScanConfig()
) -> List[PoleRecord]:
    """Locate interior poles by monotone-curve bisection.

    Scans every excitation-free interval of the search domain, bisects each
    positive eigenvalue curve of chi_s through the level 1, clusters
    coincident crossings, and ranks each located frequency by the
    multiplicity of the eigenvalue 1.
    """
    if table.size == 0:
        return []
    sym = symmetrized(table, fsqrt)
    lo_bound = scan.omega_min if scan.omega_min is not None else scan.padding
    hi_bound = (
        scan.omega_max if scan.omega_max is not None else _upper_scan_bound(sym, scan.padding)
    )
    boundaries = [g.omega for g in table.groups if lo_bound < g.omega < hi_bound]
    edges = [lo_bound] + boundaries + [hi_bound]
    crossings: List[float] = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 4.0 * scan.padding:
            continue
        pad = min(scan.padding, (hi - lo) / 8.0)
        a = lo + (pad if lo in boundaries or lo == lo_bound else 0.0)
        b = hi - (pad if hi in boundaries else 0.0)
        crossings.extend(_interval_crossings(sym, a, b, scan))
    crossings.sort()
    records: List[PoleRecord] = []
    cluster_tol = max(10.0 * scan.bisection_tol, 1e-9)
    i = 0
    while i < len(crossings):
        j = i + 1
        while j < len(crossings) and crossings[j] - crossings[j - 1] <= cluster_tol:
            j += 1
        omega = float(np.mean(crossings[i:j]))
        mult = int(np.count_nonzero(np.abs(sym.eigenvalues(omega) - 1.0) <= scan.eig1_tol))
        records.append(
            PoleRecord(omega=omega, rank=max(mult, j - i), kind="interior", method="bisection")
        )
        i = j
    return records


def rank_at_coincident_pole(
    table: TransitionTable,
    fsqrt: KernelSqrt,
    j: int,
    eig1_tol: float = EIG1_TOL,
    rank_tol: float = 1e-10,
) -> PoleRecord:
    """Rank of a reference pole as a pole of the interacting response.

    The group's own terms are removed analytically before evaluation (they
    are exactly the singular part), and the remaining operator is sandwiched
    between projectors onto the orthogonal complement of the symmetrized
    group densities.  The rank is the multiplicity of the eigenvalue 1 of
    that projected operator (the projected eigenvalue criterion).
    """
    group = table.groups[j]
    sym = symmetrized(table, fsqrt)
    idx = np.array(group.indices)
    others = np.setdiff1d(np.arange(table.size), idx)
    basis = orthonormal_basis(sym.amplitudes[:, idx], rank_tol)
    if others.size:
        denom = group.omega**2 - table.omegas[others] ** 2
        coeff = 2.0 * table.omegas[others] / denom
        amps = sym.amplitudes[:, others]
        subtracted = (amps * coeff[None, :]) @ amps.T * table.dx
        inner = basis.T @ subtracted
        projected = (
            subtracted
            - basis @ inner
            - inner.T @ basis.T
            + basis @ (inner @ basis) @ basis.T
        )
        eigs = scipy.linalg.eigvalsh(projected)
        rank = int(np.count_nonzero(np.abs(eigs - 1.0) <= eig1_tol))
    else:
        rank = 0
    return PoleRecord(omega=group.omega, rank=rank, kind="coincident", method="casida")


def _resolvent(sym: SymmetrizedEval, z: complex) -> np.ndarray:
    """(1 - chi_s(z))^{-1} with a cheap 1-norm singularity guard."""
    n = sym.amplitudes.shape[0]
    A = np.eye(n, dtype=complex) - sym.full(z)
    inv = np.linalg.inv(A)
    cond = np.linalg.norm(A, 1) * np.linalg.norm(inv, 1)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularResolventError(f"1 - chi_s is singular at z = {z}")
    return inv


def contour_residue(
    sym_or_fn,
    z0: complex,
    radius: float,
    n_quad: int,
    moment: int = 0,
) -> np.ndarray:
    """Contour moment (2 pi i)^{-1} oint (z - z0)^moment f(z) dz on a circle.

    `sym_or_fn` is either a SymmetrizedEval (f = resolvent of 1 - chi_s) or
    any matrix-valued callable of z.
    """
    fn = sym_or_fn if callable(sym_or_fn) else (lambda z: _resolvent(sym_or_fn, z))
    theta = 2.0 * np.pi * np.arange(n_quad) / n_quad
    nodes = z0 + radius * np.exp(1j * theta)
    acc = None
    for t, z in zip(theta, nodes):
        try:
            val = fn(z)
        except (AtPoleError, SingularResolventError) as exc:
            raise ContourHitsPoleError(f"quadrature node {z} sits on a pole") from exc
        term = val * ((z - z0) ** moment * np.exp(1j * t))
        acc = term if acc is None else acc + term
    return acc * (radius / n_quad)


def riesz_rank(
    table: TransitionTable,
    fsqrt: KernelSqrt,
    z0: complex,
    radius: float,
    n_quad: int = 64,
    known_poles: Optional[Sequence[float]] = None,
    residue_floor: float = RESIDUE_FLOOR,
    sv_cluster: float = SV_CLUSTER,
) -> Tuple[int, float]:
    """Rank and residue norm of (1 - chi_s)^{-1} at an isolated pole.

    Integrates the resolvent around the circle, checks quadrature
    convergence by doubling the order, and counts singular values of the
    residue above `sv_cluster` times the largest one (the documented
    clustering threshold); a residue below `residue_floor` means no pole.
    """
    if n_quad < 64:
        raise InvalidDomainError("contour quadrature needs n_quad >= 64")
    if radius <= 0:
        raise InvalidDomainError("contour radius must be positive")
    if known_poles is not None:
        for p in known_poles:
            d = abs(complex(p) - complex(z0))
            if radius / 2.0 < d < 2.0 * radius:
                raise ContourHitsPoleError(
                    f"detected pole at {p} is within 2x radius of the contour"
                )
    sym = symmetrized(table, fsqrt)
    # Evaluate at the doubled order once; the coarse estimate reuses the
    # even-index nodes, so convergence costs no extra resolvent solves.
    n_fine = 2 * n_quad
    theta = 2.0 * np.pi * np.arange(n_fine) / n_fine
    nodes = z0 + radius * np.exp(1j * theta)
    try:
        values = [_resolvent(sym, z) for z in nodes]
    except (AtPoleError, SingularResolventError) as exc:
        raise ContourHitsPoleError("quadrature node sits on a pole") from exc
    phases = np.exp(1j * theta)
    fine = sum(v * p for v, p in zip(values, phases)) * (radius / n_fine)
    coarse = sum(values[k] * phases[k] for k in range(0, n_fine, 2)) * (
        radius / n_quad
    )
    if max_abs(fine - coarse) > QUAD_STABLE_TOL * max(1.0, max_abs(fine)):
        raise QuadratureNotConvergedError(
            "doubling the quadrature order still changes the contour integral"
        )
    s = np.linalg.svd(fine, compute_uv=False)
    residue_norm = float(s[0]) if s.size else 0.0
    if residue_norm <= residue_floor:
        return 0, residue_norm
    rank = int(np.count_nonzero(s > sv_cluster * s[0]))
    return rank, residue_norm


def contour_locate(
    table: TransitionTable,
    fsqrt: KernelSqrt,
    z0: complex,
    radius: float,
    n_quad: int = 64,
) -> complex:
    """Pole location from the ratio of first to zeroth contour moments."""
    sym = symmetrized(table, fsqrt)
    m0 = contour_residue(sym, z0, radius, n_quad, moment=0)
    m1 = contour_residue(sym, z0, radius, n_quad, moment=1)
    u, s, vh = np.linalg.svd(m0)
    if s.size == 0 or s[0] <= RESIDUE_FLOOR:
        raise ContourHitsPoleError("no pole detected inside the contour")
    num = u[:, 0].conj() @ m1 @ vh[0].conj()
    den = u[:, 0].conj() @ m0 @ vh[0].conj()
    return complex(z0 + num / den)


def chi_rpa_freq(
    table: TransitionTable, F: KernelMatrix, fsqrt: KernelSqrt, z: complex
) -> np.ndarray:
    """Interacting response chi0 + chi0 F^{1/2} (1-chi_s)^{-1} F^{1/2} chi0."""
    X = chi0_freq(table, z)
    S = fsqrt.matrix
    n = S.shape[0]
    A = np.eye(n, dtype=complex) - S @ X @ S
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularResolventError(f"1 - chi_s is singular at z = {z}")
    Y = np.linalg.solve(A, S @ X)
    out = X + (X @ S) @ Y
    if complex(z).imag == 0.0:
        out = out.real
    return out


def rpa_pole_table(
    table: TransitionTable,
    fsqrt: KernelSqrt,
    scan: ScanConfig = ScanConfig(),
) -> List[PoleRecord]:
    """Full interacting pole list: interior crossings plus surviving
    coincident poles (those whose projected criterion has rank >= 1).

    The projected criterion characterizes poles shared with the reference
    for injective kernels (the mean-field case).  A zero kernel leaves the
    solution identical to the reference, whose poles are then returned
    directly; kernels that are nonzero but singular sit outside both
    regimes and poles hiding in the kernel's null space are not reported.
    """
    if max_abs(fsqrt.matrix) == 0.0:
        return [
            PoleRecord(omega=g.omega, rank=g.dim, kind="coincident", method="casida")
            for g in table.groups
        ]
    records = find_pole_crossings(table, fsqrt, scan)
    for j in range(len(table.groups)):
        rec = rank_at_coincident_pole(table, fsqrt, j, scan.eig1_tol)
        if rec.rank >= 1:
            records.append(rec)
    records.sort(key=lambda r: r.omega)
    return records


@dataclass(frozen=True, eq=False)
class ShiftReport:
    """Cumulative-rank comparison between reference and interacting poles."""

    chi0_poles: tuple  # (omega, rank) pairs
    rpa_poles: tuple  # PoleRecord
    samples: np.ndarray
    cumulative_chi0: np.ndarray
    cumulative_rpa: np.ndarray
    verdicts: np.ndarray
    equalities: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all(self.verdicts))


def default_shift_samples(
    chi0_poles: Sequence[Tuple[float, int]], rpa_poles: Sequence[PoleRecord]
) -> np.ndarray:
    """Sample frequencies straddling every pole of either list."""
    points = sorted(
        {w for w, _ in chi0_poles} | {r.omega for r in rpa_poles}
    )
    if not points:
        return np.array([1.0])
    gaps = np.diff(points)
    gaps = gaps[gaps > 1e-9]
    base = min(float(np.min(gaps)) if gaps.size else points[0], points[0])
    eps = max(base * 1e-3, 1e-9)
    samples = []
    for p in points:
        samples.append(p - eps)
        samples.append(p + eps)
    samples.append(points[-1] * 1.1 + 1.0)
    return np.array(sorted(samples))


def forward_shift_report(
    chi0_poles: Sequence[Tuple[float, int]],
    rpa_poles: Sequence[PoleRecord],
    samples: Optional[Sequence[float]] = None,
) -> ShiftReport:
    """Check the cumulative-rank inequality at each sample frequency.

    The verdict at omega is sum of interacting ranks below omega <= sum of
    reference ranks below omega; equality cases are recorded separately and
    do not fail the verdict.
    """
    chi0_poles = tuple((float(w), int(r)) for w, r in chi0_poles)
    rpa_poles = tuple(rpa_poles)
    if samples is None:
        samples = default_shift_samples(chi0_poles, rpa_poles)
    samples = np.asarray(samples, dtype=float)
    cum0 = np.array(
        [sum(r for w, r in chi0_poles if w < s) for s in samples], dtype=int
    )
    cum1 = np.array(
        [sum(p.rank for p in rpa_poles if p.omega < s) for s in samples], dtype=int
    )
    verdicts = cum1 <= cum0
    equalities = cum1 == cum0
    return ShiftReport(chi0_poles, rpa_poles, samples, cum0, cum1, verdicts, equalities)


def counting_bookkeeping(
    table: TransitionTable,
    fsqrt: KernelSqrt,
    j: int,
    delta: Optional[float] = None,
    mu0: float = 1.0,
) -> dict:
    """Jump of the counting function across a reference pole.

    Samples n_{mu0} just left and right of the group frequency and compares
    the jump with dim V_j minus the eigenvalue-mu0 multiplicity of the
    projected operator.
    """
    sym = symmetrized(table, fsqrt)
    group = table.groups[j]
    neighbors = [g.omega for g in table.groups if g.omega != group.omega]
    nearest = min(
        [abs(w - group.omega) for w in neighbors] + [group.omega], default=group.omega
    )
    if delta is None:
        delta = min(1e-6, 0.01 * nearest)
    n_left = sym.counting(group.omega - delta, mu0)
    n_right = sym.counting(group.omega + delta, mu0)
    rec = rank_at_coincident_pole(table, fsqrt, j)
    ker_dim = rec.rank if mu0 == 1.0 else None
    if ker_dim is None:
        raise InvalidDomainError("bookkeeping is implemented for mu0 = 1")
    expected = n_left + group.dim - ker_dim
    return {
        "omega": group.omega,
        "n_left": n_left,
        "n_right": n_right,
        "dim_group": group.dim,
        "kernel_dim": ker_dim,
        "consistent": n_right == expected,
    }


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of the structural property suite on one model."""

    ratio_violation: float
    blowup_constant: float
    blowup_constant_halved: float
    blowup_stable: bool
    nsd_max_eigenvalue: float
    ratio_ok: bool
    nsd_ok: bool

    @property
    def passed(self) -> bool:
        return self.ratio_ok and self.nsd_ok and self.blowup_stable


def property_checks(
    table: TransitionTable,
    fsqrt: KernelSqrt,
    seed: int = 0,
    n_f: int = 100,
    n_z: int = 50,
    ratio_slack: float = 1e-10,
    nsd_tol: float = 1e-10,
) -> PropertyReport:
    """Structural inequalities of chi_s on random probes.

    Checks the real-to-imaginary ratio bound off the real axis and below the
    first excitation, the |z|/|eta| blow-up rate of the resolvent with
    stability of its fitted constant under eta-halving, and negative
    semidefiniteness below the first excitation.
    """
    sym = symmetrized(table, fsqrt)
    rng = np.random.default_rng(seed)
    n = sym.amplitudes.shape[0]
    omega1 = table.groups[0].omega if table.groups else 1.0

    fs = rng.standard_normal((n_f, n))
    violation = -np.inf
    zs = []
    for _ in range(n_z):
        if rng.random() < 0.4:
            zs.append(complex(rng.uniform(-0.95, 0.95) * omega1, 0.0))
        else:
            eta = rng.uniform(0.05, 2.0) * (1 if rng.random() < 0.5 else -1)
            zs.append(complex(rng.uniform(0.0, 2.5) * omega1, eta))
    for z in zs:
        w, eta = z.real, z.imag
        if eta == 0.0:
            factor = 0.0
        elif w * w - eta * eta <= omega1 * omega1:
            factor = 0.0
        else:
            factor = (w * w - eta * eta - omega1 * omega1) / abs(w * eta)
        for f in fs:
            q = sym.quadratic_form(f, z)
            violation = max(violation, q.real - factor * abs(q.imag))

    def blowup_constant(etas_scale: float) -> float:
        worst = 0.0
        for z in zs:
            if z.imag == 0.0:
                continue
            zz = complex(z.real, z.imag * etas_scale)
            A = np.eye(n, dtype=complex) - sym.full(zz)
            smin = np.linalg.svd(A, compute_uv=False)[-1]
            worst = max(worst, (1.0 / smin) * abs(zz.imag) / abs(zz))
        return worst

    c_full = blowup_constant(1.0)
    c_half = blowup_constant(0.5)
    pair = sorted([c_full, c_half])
    stable = pair[1] <= 2.0 * pair[0] if pair[0] > 0 else True

    reals = np.linspace(0.02, 0.98, 25) * omega1
    nsd_max = max(float(sym.eigenvalues(w)[0]) for w in reals)

    return PropertyReport(
        ratio_violation=float(violation),
        blowup_constant=float(c_full),
        blowup_constant_halved=float(c_half),
        blowup_stable=bool(stable),
        nsd_max_eigenvalue=float(nsd_max),
        ratio_ok=bool(violation <= ratio_slack),
        nsd_ok=bool(nsd_max <= nsd_tol),
    )


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def poles_to_csv(records: Sequence[PoleRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("omega,rank,kind,method,residue_norm\n")
        for r in records:
            fh.write(f"{_fmt(r.omega)},{r.rank},{r.kind},{r.method},{_fmt(r.residue_norm)}\n")


def poles_to_json(records: Sequence[PoleRecord], path: str) -> None:
    payload = [
        {
            "omega": r.omega,
            "rank": r.rank,
            "kind": r.kind,
            "method": r.method,
            "residue_norm": r.residue_norm,
        }
        for r in records
    ]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def scan_to_csv(scan: EigenCurveScan, path: str) -> None:
    k = scan.eigenvalues.shape[1]
    with open(path, "w", newline="") as fh:
        fh.write("omega," + ",".join(f"eig_{i + 1}" for i in range(k)) + "\n")
        for w, row in zip(scan.omegas, scan.eigenvalues):
            fh.write(_fmt(w) + "," + ",".join(_fmt(v) for v in row) + "\n")


def shift_report_to_csv(report: ShiftReport, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("omega,cumulative_chi0,cumulative_rpa,verdict,equality\n")
        for i, w in enumerate(report.samples):
            fh.write(
                f"{_fmt(w)},{report.cumulative_chi0[i]},{report.cumulative_rpa[i]},"
                f"{str(bool(report.verdicts[i])).lower()},"
                f"{str(bool(report.equalities[i])).lower()}\n"
            )


def shift_report_to_json(report: ShiftReport, path: str) -> None:
    payload = {
        "holds": report.holds,
        "chi0_poles": [{"omega": w, "rank": r} for w, r in report.chi0_poles],
        "rpa_poles": [
            {"omega": p.omega, "rank": p.rank, "kind": p.kind, "method": p.method}
            for p in report.rpa_poles
        ],
        "samples": [float(s) for s in report.samples],
        "cumulative_chi0": [int(c) for c in report.cumulative_chi0],
        "cumulative_rpa": [int(c) for c in report.cumulative_rpa],
        "verdicts": [bool(v) for v in report.verdicts],
        "equalities": [bool(e) for e in report.equalities],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
