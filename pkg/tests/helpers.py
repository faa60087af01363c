"""Shared generators and independent oracles for the test suite.

The oracles here deliberately re-derive results through different code
paths than the library: plain-Python powerset enumeration for Dempster
combination, numpy.linalg.eigh for spectral questions, math.fsum loops for
statistics.  Tests compare the two.
"""

import math

import numpy as np

from gridfuse.evidence import Frame, MassFunction


def random_assignments(rng, frame_size: int, max_focal: int = 4) -> dict:
    """Random normalized focal-set assignment as a plain dict."""
    full = (1 << frame_size) - 1
    count = int(rng.integers(1, max_focal + 1))
    masses = {}
    for _ in range(count):
        bits = int(rng.integers(1, full + 1))
        masses[bits] = masses.get(bits, 0.0) + float(rng.uniform(0.05, 1.0))
    total = math.fsum(masses.values())
    return {bits: value / total for bits, value in masses.items()}


def random_mass(rng, frame: Frame, max_focal: int = 4) -> MassFunction:
    return MassFunction(frame, random_assignments(rng, frame.size, max_focal))


def nested_assignments(rng, frame_size: int) -> dict:
    """Conflict-free masses: every focal set contains hypothesis 0."""
    full = (1 << frame_size) - 1
    count = int(rng.integers(1, 4))
    masses = {}
    for _ in range(count):
        bits = (int(rng.integers(0, full + 1)) | 1) & full
        masses[bits] = masses.get(bits, 0.0) + float(rng.uniform(0.05, 1.0))
    total = math.fsum(masses.values())
    return {bits: value / total for bits, value in masses.items()}


def brute_force_pair(frame_size: int, m1: dict, m2: dict):
    """Dempster's rule by exhaustive 2^|U| x 2^|U| subset-pair enumeration.

    Returns (combined dict, conflict mass).
    """
    size = 1 << frame_size
    groups: dict = {}
    for a in range(size):
        for b in range(size):
            product = m1.get(a, 0.0) * m2.get(b, 0.0)
            if product == 0.0:
                continue
            groups.setdefault(a & b, []).append(product)
    conflict = math.fsum(groups.pop(0, []))
    k = math.fsum(value for values in groups.values() for value in values)
    combined = {bits: math.fsum(values) / k for bits, values in groups.items()}
    return combined, conflict


def brute_force_fold(frame_size: int, assignments: list):
    """Left fold of brute_force_pair over a list of assignment dicts."""
    current = assignments[0]
    conflict = 0.0
    for nxt in assignments[1:]:
        current, conflict = brute_force_pair(frame_size, current, nxt)
    return current, conflict


def brute_force_nary_conflict(frame_size: int, assignments: list) -> float:
    """1 - K with K summed over all focal-set tuples with nonempty meet."""
    size = 1 << frame_size
    agreeing = []

    def recurse(index: int, meet: int, product: float) -> None:
        if product == 0.0:
            return
        if index == len(assignments):
            if meet:
                agreeing.append(product)
            return
        for bits in range(size):
            mass = assignments[index].get(bits, 0.0)
            if mass:
                recurse(index + 1, meet & bits, product * mass)

    recurse(0, size - 1, 1.0)
    return 1.0 - math.fsum(agreeing)


def reliability_oracle(rows, masses, threshold: float):
    """Reliability weights via numpy.linalg.eigh on the weighted covariance."""
    rows = np.asarray(rows, dtype=float)
    weights = np.asarray(masses, dtype=float)
    total_weight = weights.sum()
    center = (weights @ rows) / total_weight
    deviations = rows - center
    cov = (deviations.T * weights) @ deviations / total_weight
    cov = (cov + cov.T) / 2.0
    values, vectors = np.linalg.eigh(cov)
    values = values[::-1]
    vectors = vectors[:, ::-1]
    values = np.clip(values, 0.0, None)
    total = values.sum()
    if total <= 1e-12:
        column_mass = rows.sum(axis=0)
        return column_mass / column_mass.sum(), 0
    ratios = values / total
    retained = 1
    cumulative = 0.0
    for k, ratio in enumerate(ratios):
        cumulative += ratio
        if cumulative + 1e-12 >= threshold:
            retained = k + 1
            break
    scores = np.zeros(rows.shape[1])
    for k in range(retained):
        scores += ratios[k] * np.abs(vectors[:, k])
    if scores.sum() < 1e-12:
        column_mass = rows.sum(axis=0)
        return column_mass / column_mass.sum(), 0
    return scores / scores.sum(), retained


def redistribution_oracle(frame: Frame, m1: MassFunction, m2: MassFunction, threshold: float):
    """Step-through of one redistribution fold using only numpy primitives."""
    combined: dict = {}
    conflict_rows = []
    conflict_masses = []
    for a, mass_a in m1.items():
        for b, mass_b in m2.items():
            product = mass_a * mass_b
            c = a & b
            if c:
                combined[c] = combined.get(c, 0.0) + product
            else:
                union = a | b
                involved = [i for i in range(frame.size) if union >> i & 1]
                row = [
                    product / len(involved) if union >> i & 1 else 0.0
                    for i in range(frame.size)
                ]
                conflict_rows.append(row)
                conflict_masses.append(product)
    conflict = math.fsum(conflict_masses)
    if conflict > 1e-12:
        weights, _ = reliability_oracle(conflict_rows, conflict_masses, threshold)
        for i, weight in enumerate(weights):
            if weight > 0.0:
                combined[1 << i] = combined.get(1 << i, 0.0) + conflict * float(weight)
    total = math.fsum(combined.values())
    return {bits: value / total for bits, value in combined.items()}


def fsum_mean_std(column) -> tuple:
    """Mean and sample standard deviation via math.fsum, no numpy reductions."""
    values = [float(v) for v in column]
    n = len(values)
    mean = math.fsum(values) / n
    variance = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(variance)
