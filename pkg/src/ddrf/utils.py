"""Small numerical helpers used by several modules."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NumericalFailureError

__all__ = [
    "freeze",
    "weighted_inner",
    "symmetric_sqrt",
    "numerical_rank",
    "orthonormal_basis",
    "max_abs",
    "descending_eigvalsh",
    "fit_loglog_slope",
]


def freeze(a: np.ndarray) -> np.ndarray:
    """Return a read-only float copy of `a` (immutability contract)."""
    out = np.array(a, dtype=np.asarray(a).dtype, copy=True)
    out.flags.writeable = False
    return out


def weighted_inner(f: np.ndarray, g: np.ndarray, dx: float) -> float:
    """dx-weighted inner product dx * sum(f * g)."""
    return float(dx * np.dot(f, g))


def symmetric_sqrt(matrix: np.ndarray, clip_tol: float = 1e-10) -> np.ndarray:
    """Square root of a symmetric PSD matrix by eigendecomposition.

    Eigenvalues below `clip_tol * max(eigenvalue)` in magnitude are treated as
    roundoff and clipped to zero; the caller is responsible for rejecting
    genuinely indefinite input beforehand.
    """
    try:
        w, v = scipy.linalg.eigh(matrix)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalFailureError("eigendecomposition failed") from exc
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def numerical_rank(columns: np.ndarray, tol: float = 1e-10) -> int:
    """Rank of the column set, singular values below tol * s_max discarded."""
    if columns.size == 0:
        return 0
    s = np.linalg.svd(columns, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def orthonormal_basis(columns: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (Euclidean) of the column span, rank-truncated."""
    if columns.size == 0:
        return np.zeros((columns.shape[0], 0))
    u, s, _ = np.linalg.svd(columns, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((columns.shape[0], 0))
    r = int(np.count_nonzero(s > tol * s[0]))
    return u[:, :r]


def max_abs(a: np.ndarray) -> float:
    """Max-norm of an array, 0 for empty input."""
    return float(np.max(np.abs(a))) if np.asarray(a).size else 0.0


def descending_eigvalsh(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, sorted descending."""
    return scipy.linalg.eigvalsh(matrix)[::-1]


def fit_loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of log(y) against log(x)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
