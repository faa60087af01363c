"""Principal component analysis from first principles.

Covariance accumulation, a cyclic Jacobi eigendecomposition, and component
selection by cumulative explained variance.  Jacobi is slow compared to
LAPACK but deterministic, dependency-free, and easy to verify at the small
dimensions this package needs (p <= 64).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotSymmetric, TooFewSamples

_SYMMETRY_TOL = 1e-9
_OFF_DIAGONAL_TOL = 1e-12
_MAX_SWEEPS = 100


@dataclass(frozen=True)
class PcaResult:
    mean: np.ndarray
    eigenvalues: np.ndarray      # descending, round-off negatives clamped to 0
    components: np.ndarray       # rows are orthonormal eigenvectors, same order
    explained_ratio: np.ndarray  # eigenvalue / sum(eigenvalues)
    retained: int


def covariance_matrix(data) -> np.ndarray:
    """Sample covariance with divisor n-1, symmetrized after accumulation."""
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("covariance_matrix expects a 2-D matrix")
    n = x.shape[0]
    if n < 2:
        raise TooFewSamples(f"need at least 2 rows, got {n}")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    return (cov + cov.T) / 2.0


def sym_eigen(matrix, max_sweeps: int = _MAX_SWEEPS):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns (eigenvalues descending, eigenvectors as columns).  Sweeps stop
    when every off-diagonal magnitude is below 1e-12.  Each eigenvector is
    sign-fixed so its largest-magnitude entry (first on ties) is positive.
    """
    a = np.array(matrix, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("sym_eigen expects a square matrix")
    p = a.shape[0]
    if p > 64:
        raise ValueError(f"dimension {p} exceeds the supported maximum of 64")
    if float(np.abs(a - a.T).max()) > _SYMMETRY_TOL:
        raise NotSymmetric(f"asymmetry exceeds {_SYMMETRY_TOL}")
    a = (a + a.T) / 2.0

    def max_off_diagonal() -> float:
        if p < 2:
            return 0.0
        upper = np.triu_indices(p, k=1)
        return float(np.abs(a[upper]).max())

    v = np.eye(p)
    converged = max_off_diagonal() < _OFF_DIAGONAL_TOL
    for _ in range(max_sweeps):
        if converged:
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                aij = a[i, j]
                if abs(aij) < _OFF_DIAGONAL_TOL:
                    continue
                theta = (a[j, j] - a[i, i]) / (2.0 * aij)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                row_i, row_j = a[i, :].copy(), a[j, :].copy()
                a[i, :] = c * row_i - s * row_j
                a[j, :] = s * row_i + c * row_j
                col_i, col_j = a[:, i].copy(), a[:, j].copy()
                a[:, i] = c * col_i - s * col_j
                a[:, j] = s * col_i + c * col_j
                a[i, j] = 0.0
                a[j, i] = 0.0
                vec_i, vec_j = v[:, i].copy(), v[:, j].copy()
                v[:, i] = c * vec_i - s * vec_j
                v[:, j] = s * vec_i + c * vec_j
        converged = max_off_diagonal() < _OFF_DIAGONAL_TOL
    if not converged:
        raise NoConvergence(f"no convergence in {max_sweeps} sweeps")

    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = v[:, order]
    for k in range(p):
        column = vectors[:, k]
        lead = int(np.argmax(np.abs(column)))
        if column[lead] < 0.0:
            vectors[:, k] = -column
    return eigenvalues, vectors


def _clamp_roundoff(eigenvalues: np.ndarray) -> np.ndarray:
    # Round-off on PSD matrices; the tolerance tracks the Jacobi stopping
    # threshold rather than being tighter than the decomposition itself.
    scale = max(1.0, float(np.abs(eigenvalues).max(initial=0.0)))
    clamped = eigenvalues.copy()
    clamped[(clamped < 0.0) & (clamped >= -1e-9 * scale)] = 0.0
    return clamped


def principal_components(data, variance_threshold: float) -> PcaResult:
    """PCA keeping the smallest component count whose cumulative explained
    variance reaches the threshold (always at least one component)."""
    if not 0.0 < variance_threshold <= 1.0:
        raise ValueError(f"variance threshold must be in (0, 1], got {variance_threshold}")
    x = np.asarray(data, dtype=np.float64)
    mean = x.mean(axis=0)
    cov = covariance_matrix(x)
    eigenvalues, vectors = sym_eigen(cov)
    eigenvalues = _clamp_roundoff(eigenvalues)

    total = float(eigenvalues.sum())
    if total > 0.0:
        ratios = eigenvalues / total
    else:
        ratios = np.zeros_like(eigenvalues)

    retained = 1
    cumulative = 0.0
    for k, ratio in enumerate(ratios):
        cumulative += float(ratio)
        if cumulative + 1e-12 >= variance_threshold:
            retained = k + 1
            break
    else:
        retained = max(1, len(ratios))

    return PcaResult(
        mean=mean,
        eigenvalues=eigenvalues,
        components=vectors.T,
        explained_ratio=ratios,
        retained=retained,
    )
