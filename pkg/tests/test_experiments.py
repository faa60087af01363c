import math

import numpy as np
import pytest

from gridfuse import jsonio
from gridfuse.errors import DimensionMismatch, InvalidConfig, LengthMismatch
from gridfuse.evidence import Frame
from gridfuse.experiments import (
    EvidenceBuilder,
    accuracy,
    build_evidence,
    fit_prototypes,
    predict_label,
    run_experiment1,
    run_experiment2,
)
from gridfuse.simgen import ScenarioConfig, generate_scenario

HYP3 = ("typhoon", "icing", "lightning")
TABLE1_COLUMNS = [
    "Electric energy",
    "Power factor",
    "Temperature",
    "Wind speed",
    "Line voltage",
    "Line current",
]


def two_class_builder(temperature=1.0, floor=0.1):
    frame = Frame(["h1", "h2"])
    prototypes = (np.array([[0.0, 0.0], [3.0, 0.0]]),)
    return frame, EvidenceBuilder(
        frame=frame,
        prototypes=prototypes,
        temperature=temperature,
        ignorance_floor=floor,
    )


class TestBuildEvidence:
    def test_row_at_prototype_takes_everything(self):
        frame, builder = two_class_builder(temperature=1e-6)
        (mass,) = build_evidence([np.array([0.0, 0.0])], builder)
        assert mass.mass(frame.singleton("h1")) == pytest.approx(0.9, abs=1e-12)
        assert mass.mass(frame.full) == pytest.approx(0.1, abs=1e-12)

    def test_equidistant_row_is_uniform(self):
        frame, builder = two_class_builder()
        (mass,) = build_evidence([np.array([1.5, 0.0])], builder)
        assert mass.mass(frame.singleton("h1")) == pytest.approx(0.45, abs=1e-12)
        assert mass.mass(frame.singleton("h2")) == pytest.approx(0.45, abs=1e-12)

    def test_closed_form_two_class_case(self):
        # distances 1 and 2, temperature 1, floor 0.1
        frame = Frame(["h1", "h2"])
        builder = EvidenceBuilder(
            frame=frame,
            prototypes=(np.array([[1.0, 0.0], [-2.0, 0.0]]),),
            temperature=1.0,
            ignorance_floor=0.1,
        )
        (mass,) = build_evidence([np.array([0.0, 0.0])], builder)
        e1, e2 = math.exp(-1.0), math.exp(-2.0)
        assert mass.mass(frame.singleton("h1")) == pytest.approx(
            0.9 * e1 / (e1 + e2), abs=1e-12
        )
        assert mass.mass(frame.singleton("h2")) == pytest.approx(
            0.9 * e2 / (e1 + e2), abs=1e-12
        )
        assert mass.mass(frame.full) == pytest.approx(0.1, abs=1e-12)

    def test_dimension_mismatch(self):
        _, builder = two_class_builder()
        with pytest.raises(DimensionMismatch):
            build_evidence([np.array([1.0, 2.0, 3.0])], builder)
        with pytest.raises(DimensionMismatch):
            build_evidence([np.zeros(2), np.zeros(2)], builder)

    def test_missing_class_in_training_rejected(self):
        frame = Frame(["h1", "h2"])
        with pytest.raises(InvalidConfig):
            fit_prototypes(frame, [np.zeros((3, 2))], ["h1", "h1", "h1"])


class TestAccuracy:
    def test_trivial_values(self):
        assert accuracy(["a", "b"], ["a", "b"]) == 1.0
        assert accuracy(["a", "b"], ["b", "a"]) == 0.0
        assert accuracy(["a", "a", "b", "b"], ["a", "a", "b", "a"]) == 0.75

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            accuracy(["a"], ["a", "b"])
        with pytest.raises(LengthMismatch):
            accuracy([], [])


class TestExperiment1:
    def test_table_layout_and_post_stats(self):
        scenario = generate_scenario(
            ScenarioConfig(200, HYP3, seed=42, skew_severity=1.0, source_noise=(0.4,) * 3)
        )
        result = run_experiment1(scenario.tables)
        assert list(result.excerpt_header) == TABLE1_COLUMNS
        assert len(result.excerpt_rows) == 10
        assert len(result.excerpt_indices) == 10
        for summary in result.columns:
            assert abs(summary.after.mean) <= 1e-12
            assert abs(summary.after.sample_std - 1.0) <= 1e-12

    def test_skew_repair_visible(self):
        scenario = generate_scenario(
            ScenarioConfig(1000, HYP3, seed=42, skew_severity=1.0, source_noise=(0.4,) * 3)
        )
        result = run_experiment1(scenario.tables)
        before = max(abs(c.before.skewness) for c in result.columns)
        after = max(abs(c.after.skewness) for c in result.columns)
        assert before > 1.0
        assert after < 0.3

    def test_excerpt_deterministic(self):
        scenario = generate_scenario(ScenarioConfig(50, HYP3, seed=1))
        first = run_experiment1(scenario.tables)
        second = run_experiment1(scenario.tables)
        assert first.excerpt_indices == second.excerpt_indices
        assert first.excerpt_rows == second.excerpt_rows


class TestExperiment2:
    def test_zero_conflict_identical_predictions(self):
        # Near-noiseless sources agree on every observation, so each fold
        # step carries no conflict and both methods produce the same masses.
        cfg = ScenarioConfig(
            120, HYP3, seed=8, conflict_rate=0.0, source_noise=(0.05,) * 3
        )
        result = run_experiment2(cfg, sizes=[120])
        assert result.mean_conflict < 1e-9
        assert result.predictions["ds"] == result.predictions["pca_ds"]
        assert result.accuracy_by_method["ds"] == result.accuracy_by_method["pca_ds"]

    def test_low_conflict_accuracies_close(self):
        cfg = ScenarioConfig(300, HYP3, seed=42, conflict_rate=0.0)
        result = run_experiment2(cfg, sizes=[300])
        gap = abs(result.accuracy_by_method["ds"] - result.accuracy_by_method["pca_ds"])
        assert gap <= 0.005

    def test_three_sources_two_steps(self):
        cfg = ScenarioConfig(60, HYP3, seed=5, conflict_rate=0.2)
        result = run_experiment2(cfg, sizes=[60])
        for points in result.interval_trace.values():
            assert [p[0] for p in points] == [1, 2]

    def test_series_row_per_size_and_method(self):
        cfg = ScenarioConfig(200, HYP3, seed=13)
        result = run_experiment2(cfg, sizes=[100, 200], methods=("ds", "pca_ds"))
        assert {(s, m) for s, m, _ in result.series} == {
            (100, "ds"),
            (100, "pca_ds"),
            (200, "ds"),
            (200, "pca_ds"),
        }
        assert all(0.0 <= value <= 1.0 for _, _, value in result.series)

    def test_deterministic_json(self):
        cfg = ScenarioConfig(80, HYP3, seed=21, conflict_rate=0.4)
        first = run_experiment2(cfg, sizes=[80], split_seed=3)
        second = run_experiment2(cfg, sizes=[80], split_seed=3)
        assert jsonio.dumps(first.to_json_dict()) == jsonio.dumps(second.to_json_dict())

    def test_size_validation(self):
        cfg = ScenarioConfig(100, HYP3, seed=2)
        with pytest.raises(InvalidConfig):
            run_experiment2(cfg, sizes=[200])
        with pytest.raises(InvalidConfig):
            run_experiment2(cfg, sizes=[])
        with pytest.raises(InvalidConfig):
            run_experiment2(cfg, sizes=[100], methods=("bayes",))

    def test_predict_label_breaks_ties_low(self):
        frame = Frame(["x", "y"])
        from gridfuse.evidence import MassFunction

        mass = MassFunction(frame, {frame.full: 1.0})
        assert predict_label(mass) == "x"
