"""Conflict-aware combination: redistribute conflict instead of dividing it away.

Dempster's rule handles disagreement by renormalizing, which lets two
nearly contradictory sources crown a hypothesis neither of them believed.
The combination here takes every conflicting product of two mass
functions, attributes it to the hypotheses it concerns (uniformly over the
singletons of the union of the two disjoint focal sets), extracts the
principal components of those attribution rows, and turns component
loadings into per-hypothesis reliability weights.  The conflicting mass is
then handed back to the singletons in proportion to those weights, so it
strengthens the hypotheses the disagreement was actually about instead of
vanishing into a normalizing constant or an unknown term.

When a step carries no conflict the step is exactly Dempster's rule, so
the method reduces to the classical one on agreeing evidence.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum
from typing import Dict, NamedTuple, Sequence, Tuple

import numpy as np

from . import pca
from .errors import EmptyConflict, FrameMismatch
from .evidence import (
    FocalSet,
    Frame,
    MassFunction,
    _require_same_frame,
    combine_pair,
    conjunctive_products,
    uncertainty_interval,
)

DEFAULT_VARIANCE_THRESHOLD = 0.85

_NO_CONFLICT = 1e-12


@dataclass(frozen=True)
class ConflictRow:
    """One conflict event: an ordered pair of disjoint focal sets.

    ``attribution`` spreads the pair's product mass uniformly over the
    singletons of the union, naming which hypotheses the disagreement is
    about; it sums to ``product_mass``.
    """

    left: FocalSet
    right: FocalSet
    product_mass: float
    attribution: Tuple[float, ...]


@dataclass(frozen=True)
class ConflictMatrix:
    frame: Frame
    rows: Tuple[ConflictRow, ...]


class StepInterval(NamedTuple):
    step: int
    hypothesis: str
    bel: float
    pl: float
    mu: float


class SequencePoint(NamedTuple):
    step: int
    bel: float
    pl: float
    mu: float


@dataclass(frozen=True)
class SequenceTrace:
    """Interval history of one watched hypothesis set across a fusion chain."""

    points: Tuple[SequencePoint, ...]
    best_step: int  # smallest interval width; earliest step on ties


@dataclass(frozen=True)
class FusionReport:
    method: str
    combined: MassFunction
    conflict_total: float
    reliability_weights: Tuple[float, ...]
    retained_components: int
    step_intervals: Tuple[StepInterval, ...]
    threshold: float

    def to_json_dict(self, watch: str | None = None) -> dict:
        frame = self.combined.frame
        if watch is None:
            watch = frame.labels[0]
        if watch not in frame.labels:
            raise ValueError(f"unknown hypothesis {watch!r}")
        steps = [
            {"step": s.step, "bel": s.bel, "pl": s.pl, "mu": s.mu}
            for s in self.step_intervals
            if s.hypothesis == watch
        ]
        return {
            "method": self.method,
            "conflict_total": self.conflict_total,
            "retained_components": self.retained_components,
            "weights": {
                label: weight
                for label, weight in zip(frame.labels, self.reliability_weights)
            },
            "steps": steps,
            "combined": self.combined.to_json_dict(),
        }


def build_conflict_matrix(m1: MassFunction, m2: MassFunction) -> ConflictMatrix:
    """One row per ordered disjoint pair with positive product mass."""
    frame = _require_same_frame(m1, m2)
    rows = []
    for a, mass_a in m1.items():
        for b, mass_b in m2.items():
            if a & b:
                continue
            product = mass_a * mass_b
            if product <= 0.0:
                continue
            union = a | b
            involved = [i for i in range(frame.size) if union >> i & 1]
            share = product / len(involved)
            attribution = tuple(
                share if union >> i & 1 else 0.0 for i in range(frame.size)
            )
            rows.append(
                ConflictRow(left=a, right=b, product_mass=product, attribution=attribution)
            )
    return ConflictMatrix(frame=frame, rows=tuple(rows))


def component_reliability(
    cm: ConflictMatrix, threshold: float = DEFAULT_VARIANCE_THRESHOLD
) -> Tuple[Tuple[float, ...], int]:
    """Per-hypothesis reliability weights from the conflict structure.

    The attribution rows, weighted by their product mass, are decomposed
    into principal components.  The score of hypothesis h sums, over the
    components retained by the explained-variance threshold, the
    component's variance share times the magnitude of its loading on h.
    Scores normalize to weights summing to one.

    A conflict matrix with no variance across rows (a single row, or
    identical repeats) has no components to extract; the weights then fall
    back to the column-mass shares of the attribution matrix, with a
    retained-component count of zero.
    """
    if not cm.rows:
        raise EmptyConflict("conflict matrix has no rows")
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"variance threshold must be in (0, 1], got {threshold}")

    rows = np.array([row.attribution for row in cm.rows], dtype=np.float64)
    weights = np.array([row.product_mass for row in cm.rows], dtype=np.float64)
    total_weight = float(weights.sum())

    center = (weights @ rows) / total_weight
    deviations = rows - center
    cov = (deviations.T * weights) @ deviations / total_weight
    cov = (cov + cov.T) / 2.0

    eigenvalues, vectors = pca.sym_eigen(cov)
    eigenvalues = np.where(
        (eigenvalues < 0.0) & (eigenvalues >= -1e-9 * max(1.0, float(np.abs(eigenvalues).max()))),
        0.0,
        eigenvalues,
    )
    total = float(eigenvalues.sum())

    # Attribution entries live in [0, 1], so total variance below 1e-12 is
    # round-off on a mathematically zero covariance (single row, repeats).
    if total > 1e-12:
        ratios = eigenvalues / total
        retained = 1
        cumulative = 0.0
        for k, ratio in enumerate(ratios):
            cumulative += float(ratio)
            if cumulative + 1e-12 >= threshold:
                retained = k + 1
                break
        scores = np.zeros(cm.frame.size)
        for k in range(retained):
            scores += float(ratios[k]) * np.abs(vectors[:, k])
        raw_total = float(scores.sum())
        if raw_total >= 1e-12 and float(scores.max()) >= 1e-12:
            return tuple(float(s / raw_total) for s in scores), retained

    column_mass = rows.sum(axis=0)
    fallback = column_mass / float(column_mass.sum())
    return tuple(float(w) for w in fallback), 0


def total_conflict(masses: Sequence[MassFunction]) -> float:
    """Product mass landing on empty intersections across the whole chain.

    The unnormalized conjunctive fold keeps the empty set as an absorbing
    state; whatever it holds at the end is the chain's total conflict, and
    one minus it is the classical normalization constant.
    """
    if len(masses) < 2:
        raise ValueError("conflict accounting needs at least two mass functions")
    frame = masses[0].frame
    current: Dict[FocalSet, float] = dict(masses[0].items())
    for m in masses[1:]:
        if m.frame != frame:
            raise FrameMismatch("mass functions span different frames")
        grouped: Dict[FocalSet, list] = {}
        for a, mass_a in current.items():
            for b, mass_b in m.items():
                grouped.setdefault(a & b, []).append(mass_a * mass_b)
        current = {bits: fsum(values) for bits, values in sorted(grouped.items())}
    return current.get(0, 0.0)


def _redistribute_step(
    acc: MassFunction, m: MassFunction, threshold: float
) -> Tuple[MassFunction, float, Tuple[float, ...] | None, int]:
    """One fold step: Dempster when agreeable, redistribution under conflict."""
    parts = conjunctive_products(acc, m)
    conflict = parts.conflict_mass
    if conflict <= _NO_CONFLICT:
        return combine_pair(acc, m), conflict, None, 0

    weights, retained = component_reliability(build_conflict_matrix(acc, m), threshold)
    grouped: Dict[FocalSet, list] = {}
    for (a, b), product in parts.intersecting.items():
        grouped.setdefault(a & b, []).append(product)
    for position, weight in enumerate(weights):
        if weight > 0.0:
            grouped.setdefault(1 << position, []).append(conflict * weight)
    sums = {bits: fsum(values) for bits, values in sorted(grouped.items())}
    total = fsum(sums.values())
    combined = MassFunction(parts.frame, {bits: v / total for bits, v in sums.items()})
    return combined, conflict, weights, retained


def pca_ds_combine(
    masses: Sequence[MassFunction],
    threshold: float = DEFAULT_VARIANCE_THRESHOLD,
) -> FusionReport:
    """Fold two or more mass functions with conflict redistribution.

    Folding is pairwise, left to right; the order is part of the contract
    (redistribution is not claimed associative).  Unlike Dempster's rule
    this never fails on total conflict: with no agreeing products at all,
    the entire unit mass is reassigned by the reliability weights.
    """
    return _combine_with_report(masses, "pca_ds", threshold)


def combine_report(
    masses: Sequence[MassFunction],
    method: str = "pca_ds",
    threshold: float = DEFAULT_VARIANCE_THRESHOLD,
) -> FusionReport:
    """FusionReport for either combination method over the same fold order."""
    if method not in ("ds", "pca_ds"):
        raise ValueError(f"unknown method {method!r}")
    return _combine_with_report(masses, method, threshold)


def _combine_with_report(
    masses: Sequence[MassFunction], method: str, threshold: float
) -> FusionReport:
    if len(masses) < 2:
        raise ValueError("combination needs at least two mass functions")
    frame = masses[0].frame
    for m in masses[1:]:
        if m.frame != frame:
            raise FrameMismatch("mass functions span different frames")

    acc = masses[0]
    intervals: list[StepInterval] = []
    redistributed: list[Tuple[float, Tuple[float, ...]]] = []
    retained_last = 0
    for step, m in enumerate(masses[1:], start=1):
        if method == "ds":
            acc = combine_pair(acc, m)
        else:
            acc, conflict, weights, retained = _redistribute_step(acc, m, threshold)
            if weights is not None:
                redistributed.append((conflict, weights))
                retained_last = retained
        for label, bit in frame.singletons():
            bel, pl, mu = uncertainty_interval(acc, bit)
            intervals.append(StepInterval(step, label, bel, pl, mu))

    if redistributed:
        conflict_sum = fsum(c for c, _ in redistributed)
        blended = tuple(
            fsum(c * w[i] for c, w in redistributed) / conflict_sum
            for i in range(frame.size)
        )
    else:
        blended = tuple(0.0 for _ in range(frame.size))

    return FusionReport(
        method=method,
        combined=acc,
        conflict_total=total_conflict(masses),
        reliability_weights=blended,
        retained_components=retained_last,
        step_intervals=tuple(intervals),
        threshold=threshold,
    )


def fuse_sequence(
    masses: Sequence[MassFunction],
    method: str,
    watch: FocalSet,
    threshold: float = DEFAULT_VARIANCE_THRESHOLD,
) -> SequenceTrace:
    """Interval of ``watch`` after each incremental combination.

    The best fusion point is the step with the narrowest interval: the
    most evidence folded in before the chain stops tightening.
    """
    if method not in ("ds", "pca_ds"):
        raise ValueError(f"unknown method {method!r}")
    if len(masses) < 2:
        raise ValueError("a fusion sequence needs at least two mass functions")
    masses[0].frame.check(watch)

    acc = masses[0]
    points: list[SequencePoint] = []
    for step, m in enumerate(masses[1:], start=1):
        if method == "ds":
            acc = combine_pair(acc, m)
        else:
            acc, _, _, _ = _redistribute_step(acc, m, threshold)
        bel, pl, mu = uncertainty_interval(acc, watch)
        points.append(SequencePoint(step, bel, pl, mu))

    best = min(points, key=lambda point: (point.mu, point.step)).step
    return SequenceTrace(points=tuple(points), best_step=best)
