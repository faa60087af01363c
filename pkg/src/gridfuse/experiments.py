"""Desk-scale evaluation harness: normalization summary and fusion accuracy.

Experiment 1 aligns the three source tables, standardizes each source, and
reports per-column shape statistics before and after together with a small
randomly selected excerpt of the normalized values.

Experiment 2 converts normalized rows into per-source mass functions
(softmax of negative prototype distances with an explicit ignorance
floor), fuses them per observation with the classical rule and with the
conflict-redistributing rule, and scores both against the true classes
over a range of record counts.  Prototypes are fitted on a seeded 70/30
train split; the test rows never influence the fit.

Per-observation fusion is independent; accuracy aggregation and every mean
use a fixed reduction order so repeated runs are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, InvalidConfig, LengthMismatch
from .evidence import Frame, MassFunction, pignistic
from .fusion import DEFAULT_VARIANCE_THRESHOLD, combine_report
from .normalize import ColumnParams, ColumnStats, bc_zscore, column_stats
from .prng import stream
from .simgen import ScenarioConfig, generate_scenario
from .tabular import SampleTable, align_by_timestamp

DEFAULT_TEMPERATURE = 0.05
DEFAULT_IGNORANCE_FLOOR = 0.1
TRAIN_FRACTION = 0.7

METHODS = ("ds", "pca_ds")


@dataclass(frozen=True)
class EvidenceBuilder:
    """Distance-to-mass conversion fitted per source.

    ``prototypes[s]`` is a (n_hypotheses, n_features) matrix in frame label
    order, holding the mean normalized feature vector of each class.
    """

    frame: Frame
    prototypes: Tuple[np.ndarray, ...]
    temperature: float = DEFAULT_TEMPERATURE
    ignorance_floor: float = DEFAULT_IGNORANCE_FLOOR

    def __post_init__(self):
        if self.temperature <= 0.0:
            raise InvalidConfig(f"temperature must be > 0, got {self.temperature}")
        if not 0.0 <= self.ignorance_floor < 1.0:
            raise InvalidConfig(
                f"ignorance floor must be in [0, 1), got {self.ignorance_floor}"
            )
        for proto in self.prototypes:
            if proto.shape[0] != self.frame.size:
                raise InvalidConfig("every hypothesis needs a prototype per source")


def fit_prototypes(
    frame: Frame,
    per_source_rows: Sequence[np.ndarray],
    labels: Sequence[str],
    temperature: float = DEFAULT_TEMPERATURE,
    ignorance_floor: float = DEFAULT_IGNORANCE_FLOOR,
) -> EvidenceBuilder:
    """Class-mean prototypes per source from normalized training rows."""
    prototypes = []
    for rows in per_source_rows:
        rows = np.asarray(rows, dtype=np.float64)
        if rows.shape[0] != len(labels):
            raise LengthMismatch(f"{rows.shape[0]} rows for {len(labels)} labels")
        proto = np.empty((frame.size, rows.shape[1]))
        for h, label in enumerate(frame.labels):
            member = [i for i, lab in enumerate(labels) if lab == label]
            if not member:
                raise InvalidConfig(f"class {label!r} absent from the training split")
            proto[h] = rows[member].mean(axis=0)
        prototypes.append(proto)
    return EvidenceBuilder(
        frame=frame,
        prototypes=tuple(prototypes),
        temperature=temperature,
        ignorance_floor=ignorance_floor,
    )


def build_evidence(
    rows: Sequence[np.ndarray], builder: EvidenceBuilder
) -> Tuple[MassFunction, ...]:
    """Per-source mass functions for one observation's normalized rows.

    score_h = exp(-||row - prototype_h|| / temperature); the singletons get
    (1 - floor) * score_h / sum(score) and the whole frame gets the floor.
    """
    if len(rows) != len(builder.prototypes):
        raise DimensionMismatch(
            f"{len(rows)} source rows for {len(builder.prototypes)} prototype sets"
        )
    masses = []
    for row, proto in zip(rows, builder.prototypes):
        row = np.asarray(row, dtype=np.float64)
        if row.shape != (proto.shape[1],):
            raise DimensionMismatch(
                f"row has {row.shape} features, prototypes expect {proto.shape[1]}"
            )
        distances = np.sqrt(((proto - row) ** 2).sum(axis=1))
        # Shifting by the minimum distance cancels in the ratio and keeps
        # the exponentials from underflowing together.
        scores = np.exp(-(distances - distances.min()) / builder.temperature)
        singles = (1.0 - builder.ignorance_floor) * scores / scores.sum()
        assignments: Dict[int, float] = {
            1 << i: float(v) for i, v in enumerate(singles) if v > 0.0
        }
        if builder.ignorance_floor > 0.0:
            assignments[builder.frame.full] = builder.ignorance_floor
        masses.append(MassFunction(builder.frame, assignments))
    return tuple(masses)


def predict_label(m: MassFunction) -> str:
    """Hypothesis with maximal pignistic probability; ties take the lowest
    frame index."""
    probabilities = pignistic(m)
    best = 0
    for i in range(1, len(probabilities)):
        if probabilities[i] > probabilities[best]:
            best = i
    return m.frame.labels[best]


def accuracy(predictions: Sequence[str], labels: Sequence[str]) -> float:
    if len(predictions) != len(labels):
        raise LengthMismatch(f"{len(predictions)} predictions for {len(labels)} labels")
    if not predictions:
        raise LengthMismatch("accuracy of empty sequences is undefined")
    return sum(p == t for p, t in zip(predictions, labels)) / len(predictions)


@dataclass(frozen=True)
class ColumnSummary:
    name: str
    source: str
    before: ColumnStats
    after: ColumnStats
    params: ColumnParams

    def to_json_dict(self) -> dict:
        def stats(s: ColumnStats) -> dict:
            return {
                "mean": s.mean,
                "std": s.sample_std,
                "skewness": s.skewness,
                "kurtosis": s.kurtosis,
            }

        return {
            "name": self.name,
            "source": self.source,
            "lambda": self.params.lam,
            "shift": self.params.shift,
            "degenerate": self.params.degenerate,
            "before": stats(self.before),
            "after": stats(self.after),
        }


@dataclass(frozen=True)
class Experiment1Result:
    columns: Tuple[ColumnSummary, ...]
    excerpt_header: Tuple[str, ...]
    excerpt_indices: Tuple[int, ...]
    excerpt_rows: Tuple[Tuple[float, ...], ...]
    normalized: Tuple[SampleTable, ...]

    def to_json_dict(self) -> dict:
        return {
            "columns": [c.to_json_dict() for c in self.columns],
            "excerpt": {
                "header": list(self.excerpt_header),
                "indices": list(self.excerpt_indices),
                "rows": [list(row) for row in self.excerpt_rows],
            },
        }


def run_experiment1(
    tables: Sequence[SampleTable],
    excerpt_size: int = 10,
    excerpt_seed: int = 0,
) -> Experiment1Result:
    """Align, standardize per source, and summarize before/after shape."""
    aligned = align_by_timestamp(tables)
    shared = set(aligned.timestamps)
    summaries: list[ColumnSummary] = []
    normalized_tables: list[SampleTable] = []
    blocks: list[np.ndarray] = []
    for table in tables:
        keep = [i for i, ts in enumerate(table.timestamps) if ts in shared]
        raw = table.values[keep, :]
        normalized, params = bc_zscore(raw)
        blocks.append(normalized)
        normalized_tables.append(SampleTable(aligned.timestamps, normalized, table.columns))
        for j, meta in enumerate(table.columns):
            summaries.append(
                ColumnSummary(
                    name=meta.name,
                    source=meta.source_kind.value,
                    before=column_stats(raw[:, j]),
                    after=column_stats(normalized[:, j]),
                    params=params[j],
                )
            )

    matrix = np.hstack(blocks)
    header = tuple(meta.name for table in tables for meta in table.columns)
    n = matrix.shape[0]
    rng = stream(excerpt_seed, "excerpt")
    order = list(range(n))
    rng.shuffle(order)
    indices = tuple(sorted(order[: min(excerpt_size, n)]))
    rows = tuple(tuple(float(v) for v in matrix[i]) for i in indices)
    return Experiment1Result(
        columns=tuple(summaries),
        excerpt_header=header,
        excerpt_indices=indices,
        excerpt_rows=rows,
        normalized=tuple(normalized_tables),
    )


@dataclass(frozen=True)
class ExperimentResult:
    config: ScenarioConfig
    split_seed: int
    sizes: Tuple[int, ...]
    methods: Tuple[str, ...]
    accuracy_by_method: Mapping[str, float]
    series: Tuple[Tuple[int, str, float], ...]
    interval_trace: Mapping[str, Tuple[Tuple[int, float, float, float], ...]]
    predictions: Mapping[str, Tuple[str, ...]]  # per method, at the largest size
    test_labels: Tuple[str, ...]
    mean_conflict: float
    normalization: Tuple[ColumnSummary, ...]
    temperature: float
    ignorance_floor: float
    threshold: float

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "split_seed": self.split_seed,
            "temperature": self.temperature,
            "ignorance_floor": self.ignorance_floor,
            "threshold": self.threshold,
            "sizes": list(self.sizes),
            "methods": list(self.methods),
            "accuracy": dict(self.accuracy_by_method),
            "series": [
                {"size": size, "method": method, "accuracy": value}
                for size, method, value in self.series
            ],
            "interval_trace": {
                method: [
                    {"step": step, "bel": bel, "pl": pl, "mu": mu}
                    for step, bel, pl, mu in points
                ]
                for method, points in self.interval_trace.items()
            },
            "predictions": {m: list(p) for m, p in self.predictions.items()},
            "test_labels": list(self.test_labels),
            "mean_conflict": self.mean_conflict,
            "normalization": [c.to_json_dict() for c in self.normalization],
        }


def _split_indices(size: int, split_seed: int) -> Tuple[list, list]:
    rng = stream(split_seed, f"split-{size}")
    order = list(range(size))
    rng.shuffle(order)
    n_train = int(round(TRAIN_FRACTION * size))
    n_train = min(max(n_train, 1), size - 1)
    return sorted(order[:n_train]), sorted(order[n_train:])


def run_experiment2(
    config: ScenarioConfig,
    sizes: Sequence[int],
    methods: Sequence[str] = METHODS,
    split_seed: int = 0,
    temperature: float = DEFAULT_TEMPERATURE,
    ignorance_floor: float = DEFAULT_IGNORANCE_FLOOR,
    threshold: float = DEFAULT_VARIANCE_THRESHOLD,
) -> ExperimentResult:
    """Fusion accuracy of each method per record count, plus interval traces."""
    sizes = sorted(set(int(s) for s in sizes))
    if not sizes:
        raise InvalidConfig("need at least one record count")
    if sizes[0] < 10:
        raise InvalidConfig("record counts below 10 cannot be split")
    if sizes[-1] > config.n_observations:
        raise InvalidConfig(
            f"largest record count {sizes[-1]} exceeds the scenario's {config.n_observations}"
        )
    methods = tuple(methods)
    for method in methods:
        if method not in METHODS:
            raise InvalidConfig(f"unknown fusion method {method!r}")
    if not methods:
        raise InvalidConfig("need at least one fusion method")

    scenario = generate_scenario(config)
    frame = Frame(config.hypotheses)
    full_size = sizes[-1]

    series: list[Tuple[int, str, float]] = []
    accuracy_by_method: Dict[str, float] = {}
    interval_trace: Dict[str, Tuple[Tuple[int, float, float, float], ...]] = {}
    final_predictions: Dict[str, Tuple[str, ...]] = {}
    final_test_labels: Tuple[str, ...] = ()
    normalization: Tuple[ColumnSummary, ...] = ()
    mean_conflict = 0.0

    for size in sizes:
        train_idx, test_idx = _split_indices(size, split_seed)
        train_labels = [scenario.labels[i] for i in train_idx]
        test_labels = [scenario.labels[i] for i in test_idx]

        train_norm: list[np.ndarray] = []
        test_norm: list[np.ndarray] = []
        size_summaries: list[ColumnSummary] = []
        for table in scenario.tables:
            train_raw = table.values[train_idx, :]
            test_raw = table.values[test_idx, :]
            normalized_train, params = bc_zscore(train_raw)
            normalized_test, _ = bc_zscore(test_raw, params)
            train_norm.append(normalized_train)
            test_norm.append(normalized_test)
            for j, meta in enumerate(table.columns):
                size_summaries.append(
                    ColumnSummary(
                        name=meta.name,
                        source=meta.source_kind.value,
                        before=column_stats(train_raw[:, j]),
                        after=column_stats(normalized_train[:, j]),
                        params=params[j],
                    )
                )

        builder = fit_prototypes(
            frame, train_norm, train_labels, temperature, ignorance_floor
        )

        predictions: Dict[str, list] = {method: [] for method in methods}
        step_values: Dict[str, Dict[int, Dict[str, list]]] = {
            method: {} for method in methods
        }
        conflicts: list[float] = []
        for t, observation in enumerate(test_idx):
            masses = build_evidence([norm[t] for norm in test_norm], builder)
            true_label = scenario.labels[observation]
            for position, method in enumerate(methods):
                report = combine_report(masses, method, threshold)
                predictions[method].append(predict_label(report.combined))
                if size != full_size:
                    continue
                if position == 0:
                    conflicts.append(report.conflict_total)
                for interval in report.step_intervals:
                    if interval.hypothesis != true_label:
                        continue
                    bucket = step_values[method].setdefault(
                        interval.step, {"bel": [], "pl": [], "mu": []}
                    )
                    bucket["bel"].append(interval.bel)
                    bucket["pl"].append(interval.pl)
                    bucket["mu"].append(interval.mu)

        for method in methods:
            score = accuracy(predictions[method], test_labels)
            series.append((size, method, score))
            if size == full_size:
                accuracy_by_method[method] = score

        if size == full_size:
            normalization = tuple(size_summaries)
            mean_conflict = fsum(conflicts) / len(conflicts)
            final_test_labels = tuple(test_labels)
            final_predictions = {m: tuple(p) for m, p in predictions.items()}
            for method in methods:
                points = []
                for step in sorted(step_values[method]):
                    bucket = step_values[method][step]
                    count = len(bucket["bel"])
                    points.append(
                        (
                            step,
                            fsum(bucket["bel"]) / count,
                            fsum(bucket["pl"]) / count,
                            fsum(bucket["mu"]) / count,
                        )
                    )
                interval_trace[method] = tuple(points)

    return ExperimentResult(
        config=config,
        split_seed=split_seed,
        sizes=tuple(sizes),
        methods=methods,
        accuracy_by_method=accuracy_by_method,
        series=tuple(series),
        interval_trace=interval_trace,
        predictions=final_predictions,
        test_labels=final_test_labels,
        mean_conflict=mean_conflict,
        normalization=normalization,
        temperature=temperature,
        ignorance_floor=ignorance_floor,
        threshold=threshold,
    )
