"""Skew repair and standardization: Box-Cox power transform, then z-score.

Plain z-scoring assumes roughly normal columns; heavy-tailed sensor feeds
violate that and drag the standardized values off center.  Each column is
therefore first shifted to positivity, power-transformed with a lambda
fitted by profile likelihood over a fixed grid, and only then centered and
scaled to unit sample standard deviation.

All operations are pure functions over float64 arrays.  Per-column work is
independent; results are bit-identical regardless of evaluation order
because every reduction runs in a fixed order within its column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateColumn, NonPositiveInput, ParamsMismatch, TooFewSamples

LAMBDA_GRID = (-5.0, 5.0, 0.01)

_LOG_BRANCH = 1e-10


@dataclass(frozen=True)
class ColumnStats:
    mean: float
    sample_std: float
    skewness: float
    kurtosis: float


@dataclass(frozen=True)
class ColumnParams:
    """Fitted per-column transform: power, positivity shift, z constants.

    ``mean`` and ``std`` describe the Box-Cox output on the fitting data and
    are applied as-is when the params are reused, so a train/apply split
    never leaks statistics from the apply side.
    """

    lam: float
    shift: float
    mean: float
    std: float
    degenerate: bool = False


BoxCoxParams = Tuple[ColumnParams, ...]


def column_stats(column) -> ColumnStats:
    """Mean, sample (n-1) std, and population-moment skewness/kurtosis."""
    x = np.asarray(column, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("column_stats expects a 1-D column")
    n = x.size
    if n < 2:
        raise TooFewSamples(f"need at least 2 samples, got {n}")
    mean = float(x.mean())
    sample_std = float(x.std(ddof=1))
    centered = x - mean
    m2 = float((centered**2).mean())
    if m2 > 0.0:
        m3 = float((centered**3).mean())
        m4 = float((centered**4).mean())
        skewness = m3 / m2**1.5
        kurtosis = m4 / m2**2 - 3.0
    else:
        skewness = 0.0
        kurtosis = 0.0
    return ColumnStats(mean=mean, sample_std=sample_std, skewness=skewness, kurtosis=kurtosis)


def boxcox(column, lam: float) -> np.ndarray:
    """Power transform: (x**lam - 1)/lam, or ln x on the small-lambda branch.

    Strictly increasing in x for every lambda, so column order statistics
    survive the transform.
    """
    x = np.asarray(column, dtype=np.float64)
    if x.size and float(x.min()) <= 0.0:
        raise NonPositiveInput(f"inputs must be > 0, min is {x.min()}")
    if abs(lam) > _LOG_BRANCH:
        return (np.power(x, lam) - 1.0) / lam
    return np.log(x)


def positivity_shift(column) -> float:
    """0 for strictly positive columns, else 1 - min(x)."""
    x = np.asarray(column, dtype=np.float64)
    low = float(x.min())
    return 0.0 if low > 0.0 else 1.0 - low


def fit_lambda(column, grid: Tuple[float, float, float] = LAMBDA_GRID) -> Tuple[float, float]:
    """Fit (lambda, shift) by maximizing the profile log-likelihood on a grid.

    L(lam) = -(n/2) * ln(var(y_lam)) + (lam - 1) * sum(ln(x + shift)),
    var taken with divisor n.  Ties prefer the lambda closest to 1, then
    the smaller lambda.
    """
    x = np.asarray(column, dtype=np.float64)
    n = x.size
    if n < 3:
        raise TooFewSamples(f"lambda fit needs at least 3 samples, got {n}")
    if float(x.max()) == float(x.min()):
        raise DegenerateColumn("cannot fit a constant column")
    shift = positivity_shift(x)
    shifted = x + shift
    log_sum = float(np.log(shifted).sum())

    lo, hi, step = grid
    if not (lo <= hi and step > 0.0):
        raise ValueError(f"bad lambda grid {grid}")
    count = int(round((hi - lo) / step)) + 1

    best_lam = None
    best_score = -math.inf
    best_dist = math.inf
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(count):
            lam = lo + k * step
            y = boxcox(shifted, lam)
            variance = float(y.var())
            if not math.isfinite(variance) or variance <= 0.0:
                continue
            score = -0.5 * n * math.log(variance) + (lam - 1.0) * log_sum
            dist = abs(lam - 1.0)
            if (
                score > best_score
                or (score == best_score and (dist < best_dist or (dist == best_dist and lam < best_lam)))
            ):
                best_lam, best_score, best_dist = lam, score, dist
    if best_lam is None:
        raise DegenerateColumn("profile likelihood undefined everywhere on the grid")
    return best_lam, shift


def _fit_z_constants(column: np.ndarray) -> Tuple[float, float]:
    # Two refinement passes at fit time; application is a single affine pass,
    # so stored constants reproduce the fitted output exactly.
    m1 = float(column.mean())
    s1 = float(column.std(ddof=1))
    if s1 == 0.0:
        return m1, 0.0
    first = (column - m1) / s1
    m2 = float(first.mean())
    s2 = float(first.std(ddof=1))
    return m1 + m2 * s1, s1 * s2


def _apply_z(column: np.ndarray, mean: float, std: float) -> np.ndarray:
    if std == 0.0:
        return np.zeros_like(column)
    return (column - mean) / std


def zscore_columns(matrix) -> Tuple[np.ndarray, np.ndarray]:
    """Standardize each column to mean 0 / sample std 1.

    Returns (standardized matrix, per-column degenerate flags).  Constant
    columns come back as all zeros with their flag set; a stalled sensor
    must not kill the pipeline.
    """
    data = np.asarray(matrix, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("zscore_columns expects a 2-D matrix")
    n, p = data.shape
    if n < 2:
        raise TooFewSamples(f"need at least 2 rows, got {n}")
    out = np.empty_like(data)
    flags = np.zeros(p, dtype=bool)
    for j in range(p):
        mean, std = _fit_z_constants(data[:, j])
        flags[j] = std == 0.0
        out[:, j] = _apply_z(data[:, j], mean, std)
    return out, flags


def _fit_column(
    column: np.ndarray, grid: Tuple[float, float, float]
) -> Tuple[np.ndarray, ColumnParams]:
    if float(column.max()) == float(column.min()):
        shift = positivity_shift(column)
        constant = float(boxcox(column[:1] + shift, 1.0)[0])
        params = ColumnParams(lam=1.0, shift=shift, mean=constant, std=0.0, degenerate=True)
        return np.zeros_like(column), params
    lam, shift = fit_lambda(column, grid)
    transformed = boxcox(column + shift, lam)
    mean, std = _fit_z_constants(transformed)
    params = ColumnParams(lam=lam, shift=shift, mean=mean, std=std, degenerate=std == 0.0)
    return _apply_z(transformed, mean, std), params


def _apply_column(column: np.ndarray, params: ColumnParams) -> np.ndarray:
    # Reused shifts were chosen for the fitting data; apply-side values that
    # still land at or below zero are clamped just above it.
    shifted = np.maximum(column + params.shift, 1e-12)
    transformed = boxcox(shifted, params.lam)
    return _apply_z(transformed, params.mean, params.std)


def bc_zscore(
    data,
    params: Optional[Sequence[ColumnParams]] = None,
    grid: Tuple[float, float, float] = LAMBDA_GRID,
):
    """Box-Cox + z-score over a vector, matrix, or higher-rank array.

    A vector is one column; a matrix is normalized column by column; for a
    higher-rank array every trailing-axis slice along the first axis is
    treated as a column and the shape is restored afterwards.  Pass the
    params from a previous fit to reuse them without refitting.

    Returns (normalized array, params).
    """
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 0:
        raise ValueError("bc_zscore needs at least one axis")
    original_shape = arr.shape
    if arr.ndim == 1:
        work = arr.reshape(-1, 1)
    elif arr.ndim == 2:
        work = arr
    else:
        work = arr.reshape(arr.shape[0], -1)

    n, p = work.shape
    if n < 2:
        raise TooFewSamples(f"need at least 2 entries along the normalized axis, got {n}")

    out = np.empty_like(work)
    if params is None:
        fitted: list[ColumnParams] = []
        for j in range(p):
            out[:, j], column_params = _fit_column(work[:, j], grid)
            fitted.append(column_params)
        result_params: BoxCoxParams = tuple(fitted)
    else:
        result_params = tuple(params)
        if len(result_params) != p:
            raise ParamsMismatch(f"{len(result_params)} params for {p} columns")
        for j, column_params in enumerate(result_params):
            out[:, j] = _apply_column(work[:, j], column_params)

    return out.reshape(original_shape), result_params
