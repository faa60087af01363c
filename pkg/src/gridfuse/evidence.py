"""Dempster-Shafer core: frames, mass functions, belief intervals, combination.

Hypothesis sets are bitmasks over an ordered frame of at most 16 labels, so
subset tests are single AND operations and exhaustive enumeration stays
cheap.  Every mass summation uses ``math.fsum``; its correctly rounded
results make belief/plausibility order-independent and guarantee
Pl(A) >= Bel(A) at machine precision, not just approximately.

All values are immutable and all operations pure, so everything here is
safe for concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum
from typing import Dict, Iterable, Mapping, Sequence, Tuple

from .errors import FrameMismatch, TotalConflict

FocalSet = int  # bitmask over frame positions; bit i set <=> hypothesis i included

MASS_SUM_TOL = 1e-9

_CONFLICT_FLOOR = 1e-12


class Frame:
    """Ordered universe of mutually exclusive hypotheses (1..16 labels)."""

    __slots__ = ("labels", "_positions")

    def __init__(self, labels: Iterable[str]):
        labels = tuple(labels)
        if not 1 <= len(labels) <= 16:
            raise ValueError(f"frame must hold 1..16 hypotheses, got {len(labels)}")
        if any(not isinstance(lab, str) or not lab for lab in labels):
            raise ValueError("hypothesis labels must be nonempty strings")
        if len(set(labels)) != len(labels):
            raise ValueError("hypothesis labels must be unique")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_positions", {lab: i for i, lab in enumerate(labels)})

    def __setattr__(self, name, value):
        raise AttributeError("Frame is immutable")

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def full(self) -> FocalSet:
        """Bitmask of the whole frame."""
        return (1 << self.size) - 1

    def singleton(self, label: str) -> FocalSet:
        try:
            return 1 << self._positions[label]
        except KeyError:
            raise ValueError(f"unknown hypothesis {label!r}") from None

    def subset(self, labels: Iterable[str]) -> FocalSet:
        bits = 0
        for label in labels:
            bits |= self.singleton(label)
        return bits

    def members(self, bits: FocalSet) -> Tuple[str, ...]:
        self.check(bits)
        return tuple(lab for i, lab in enumerate(self.labels) if bits >> i & 1)

    def singletons(self) -> Tuple[Tuple[str, FocalSet], ...]:
        return tuple((lab, 1 << i) for i, lab in enumerate(self.labels))

    def check(self, bits: FocalSet) -> None:
        if not isinstance(bits, int) or not 0 <= bits <= self.full:
            raise FrameMismatch(f"{bits!r} is not a subset of a {self.size}-hypothesis frame")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self):
        return f"Frame({list(self.labels)!r})"


def validate_mass(frame: Frame, assignments: Mapping[FocalSet, float]) -> list[str]:
    """Check a raw focal-set -> mass mapping; returns violations (empty = ok).

    The basic-assignment axioms: no mass on the empty set, no negative
    masses, and a total of one (within 1e-9, since constructed functions
    are renormalized anyway).
    """
    problems: list[str] = []
    for bits, value in assignments.items():
        if not isinstance(bits, int) or not 0 <= bits <= frame.full:
            problems.append(f"focal set {bits!r} is outside the frame")
        elif bits == 0 and value != 0.0:
            problems.append(f"empty set carries mass {value}")
        if value < 0.0:
            problems.append(f"negative mass {value} on {bits!r}")
    total = fsum(assignments.values())
    if abs(total - 1.0) > MASS_SUM_TOL:
        problems.append(f"masses sum to {total!r}, not 1")
    return problems


class MassFunction:
    """Basic probability assignment: unit belief spread over focal sets.

    Construction validates the axioms, drops zero entries, renormalizes the
    total to exactly one, and stores focal sets in ascending bitmask order
    so iteration is deterministic.
    """

    __slots__ = ("frame", "_masses")

    def __init__(self, frame: Frame, assignments: Mapping[FocalSet, float]):
        problems = validate_mass(frame, assignments)
        if problems:
            raise ValueError("invalid mass function: " + "; ".join(problems))
        total = fsum(assignments.values())
        masses = {
            bits: value / total
            for bits, value in sorted(assignments.items())
            if value > 0.0
        }
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "_masses", masses)

    def __setattr__(self, name, value):
        raise AttributeError("MassFunction is immutable")

    @classmethod
    def from_labels(cls, frame: Frame, assignments: Mapping) -> "MassFunction":
        """Build from label sets: keys are labels, label iterables, or None
        for the whole frame."""
        converted: Dict[FocalSet, float] = {}
        for key, value in assignments.items():
            if key is None:
                bits = frame.full
            elif isinstance(key, str):
                bits = frame.singleton(key)
            else:
                bits = frame.subset(key)
            converted[bits] = converted.get(bits, 0.0) + value
        return cls(frame, converted)

    def mass(self, bits: FocalSet) -> float:
        self.frame.check(bits)
        return self._masses.get(bits, 0.0)

    def items(self) -> Tuple[Tuple[FocalSet, float], ...]:
        return tuple(self._masses.items())

    def focal_sets(self) -> Tuple[FocalSet, ...]:
        return tuple(self._masses)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MassFunction):
            return NotImplemented
        return self.frame == other.frame and self._masses == other._masses

    def __hash__(self):
        return hash((self.frame, tuple(self._masses.items())))

    def __repr__(self):
        body = ", ".join(
            f"{'|'.join(self.frame.members(bits)) or '{}'}: {value:.6g}"
            for bits, value in self._masses.items()
        )
        return f"MassFunction({body})"

    def to_json_dict(self) -> dict:
        return {
            "frame": list(self.frame.labels),
            "masses": {
                "|".join(sorted(self.frame.members(bits))): value
                for bits, value in self._masses.items()
            },
        }

    @classmethod
    def from_json_dict(cls, payload: Mapping) -> "MassFunction":
        frame = Frame(payload["frame"])
        assignments = {
            frame.subset(key.split("|")): float(value)
            for key, value in payload["masses"].items()
        }
        return cls(frame, assignments)


def _require_same_frame(first: MassFunction, second: MassFunction) -> Frame:
    if first.frame != second.frame:
        raise FrameMismatch(
            f"frames differ: {first.frame.labels} vs {second.frame.labels}"
        )
    return first.frame


def vacuous(frame: Frame) -> MassFunction:
    """Total ignorance: all mass on the whole frame."""
    return MassFunction(frame, {frame.full: 1.0})


def belief(m: MassFunction, a: FocalSet) -> float:
    """Bel(A): total mass of nonempty focal sets contained in A."""
    m.frame.check(a)
    return fsum(value for bits, value in m.items() if bits & ~a == 0)


def plausibility(m: MassFunction, a: FocalSet) -> float:
    """Pl(A): total mass of focal sets intersecting A; 1 - Bel(complement)."""
    m.frame.check(a)
    return fsum(value for bits, value in m.items() if bits & a)


def uncertainty_interval(m: MassFunction, a: FocalSet) -> Tuple[float, float, float]:
    """(Bel, Pl, Pl - Bel): the belief interval and its width."""
    bel = belief(m, a)
    pl = plausibility(m, a)
    return bel, pl, pl - bel


@dataclass(frozen=True)
class ConjunctiveProducts:
    """All pairwise products of two mass functions, split by intersection.

    ``intersecting`` holds pairs whose focal sets meet; ``conflicting`` the
    pairs that are disjoint.  The two parts partition the unit product mass.
    """

    frame: Frame
    intersecting: Mapping[Tuple[FocalSet, FocalSet], float]
    conflicting: Mapping[Tuple[FocalSet, FocalSet], float]

    @property
    def agreement_mass(self) -> float:
        """Total non-conflicting product mass (the combination's K)."""
        return fsum(self.intersecting.values())

    @property
    def conflict_mass(self) -> float:
        """Total product mass on empty intersections (1 - K)."""
        return fsum(self.conflicting.values())


def conjunctive_products(m1: MassFunction, m2: MassFunction) -> ConjunctiveProducts:
    frame = _require_same_frame(m1, m2)
    intersecting: Dict[Tuple[FocalSet, FocalSet], float] = {}
    conflicting: Dict[Tuple[FocalSet, FocalSet], float] = {}
    for a, mass_a in m1.items():
        for b, mass_b in m2.items():
            product = mass_a * mass_b
            if product == 0.0:
                continue
            target = intersecting if a & b else conflicting
            target[(a, b)] = product
    return ConjunctiveProducts(frame=frame, intersecting=intersecting, conflicting=conflicting)


def combine_pair(m1: MassFunction, m2: MassFunction) -> MassFunction:
    """One application of Dempster's rule; raises on (near-)total conflict."""
    parts = conjunctive_products(m1, m2)
    k = parts.agreement_mass
    if k <= _CONFLICT_FLOOR:
        raise TotalConflict(f"agreement mass {k!r} leaves the combination undefined")
    grouped: Dict[FocalSet, list] = {}
    for (a, b), product in parts.intersecting.items():
        grouped.setdefault(a & b, []).append(product)
    assignments = {bits: fsum(values) / k for bits, values in sorted(grouped.items())}
    return MassFunction(parts.frame, assignments)


def dempster_combine(masses: Sequence[MassFunction]) -> MassFunction:
    """Fold Dempster's rule over two or more mass functions, left to right."""
    if len(masses) < 2:
        raise ValueError("combination needs at least two mass functions")
    combined = masses[0]
    for m in masses[1:]:
        combined = combine_pair(combined, m)
    return combined


def pignistic(m: MassFunction) -> Tuple[float, ...]:
    """Point-probability reduction: each focal set's mass split evenly
    among its members.  Returned in frame label order."""
    shares: list[list] = [[] for _ in range(m.frame.size)]
    for bits, value in m.items():
        width = bits.bit_count()
        share = value / width
        for i in range(m.frame.size):
            if bits >> i & 1:
                shares[i].append(share)
    return tuple(fsum(values) for values in shares)
