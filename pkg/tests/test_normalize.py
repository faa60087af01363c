import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridfuse.errors import (
    DegenerateColumn,
    NonPositiveInput,
    ParamsMismatch,
    TooFewSamples,
)
from gridfuse.normalize import (
    ColumnParams,
    bc_zscore,
    boxcox,
    column_stats,
    fit_lambda,
    positivity_shift,
    zscore_columns,
)
from gridfuse.prng import stream

from helpers import fsum_mean_std


class TestColumnStats:
    def test_symmetric_triple(self):
        stats = column_stats([1.0, 2.0, 3.0])
        assert stats.mean == pytest.approx(2.0, abs=1e-15)
        assert stats.sample_std == pytest.approx(1.0, abs=1e-15)
        assert stats.skewness == pytest.approx(0.0, abs=1e-15)

    def test_constant_column(self):
        stats = column_stats([5.0, 5.0, 5.0, 5.0])
        assert stats.mean == 5.0
        assert stats.sample_std == 0.0
        assert stats.skewness == 0.0
        assert stats.kurtosis == 0.0

    def test_skewness_against_hand_moments(self):
        column = [1.0, 1.0, 1.0, 10.0]
        mean = math.fsum(column) / 4
        m2 = math.fsum((v - mean) ** 2 for v in column) / 4
        m3 = math.fsum((v - mean) ** 3 for v in column) / 4
        m4 = math.fsum((v - mean) ** 4 for v in column) / 4
        stats = column_stats(column)
        assert stats.skewness == pytest.approx(m3 / m2**1.5, abs=1e-12)
        assert stats.skewness == pytest.approx(1.1547, abs=2e-4)
        assert stats.kurtosis == pytest.approx(m4 / m2**2 - 3.0, abs=1e-12)

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            column_stats([1.0])


class TestBoxcox:
    def test_unit_lambda_is_shift(self):
        assert boxcox([2.0, 3.0, 4.0], 1.0).tolist() == [1.0, 2.0, 3.0]

    def test_log_branch(self):
        out = boxcox([1.0, math.e, math.e**2], 0.0)
        assert out == pytest.approx([0.0, 1.0, 2.0], abs=1e-15)

    def test_sqrt_lambda(self):
        out = boxcox([1.0, 4.0, 9.0], 0.5)
        assert out == pytest.approx([0.0, 2.0, 4.0], abs=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(NonPositiveInput):
            boxcox([1.0, 0.0, 2.0], 0.5)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(0.01, 1e6), min_size=2, max_size=30),
        st.floats(-5.0, 5.0),
    )
    def test_monotone_in_input(self, values, lam):
        out = boxcox(sorted(values), lam)
        assert all(a <= b for a, b in zip(out, out[1:]))


def grid_oracle(column, shift):
    """Independent profile-likelihood evaluation on the default grid."""
    shifted = [v + shift for v in column]
    n = len(shifted)
    log_sum = math.fsum(math.log(v) for v in shifted)
    best, best_score = None, -math.inf
    for k in range(1001):
        lam = (k - 500) / 100.0
        if abs(lam) > 1e-10:
            transformed = [(v**lam - 1.0) / lam for v in shifted]
        else:
            transformed = [math.log(v) for v in shifted]
        mean = math.fsum(transformed) / n
        variance = math.fsum((v - mean) ** 2 for v in transformed) / n
        if variance <= 0 or not math.isfinite(variance):
            continue
        score = -0.5 * n * math.log(variance) + (lam - 1.0) * log_sum
        if score > best_score:
            best, best_score = lam, score
    return best


class TestFitLambda:
    def test_linear_column_matches_grid_oracle(self):
        column = np.arange(1.0, 101.0)
        lam, shift = fit_lambda(column)
        assert shift == 0.0
        assert lam == pytest.approx(grid_oracle(column, shift), abs=1e-12)

    def test_lognormal_column_restored_by_log(self):
        rng = stream(2024, "lognormal")
        column = np.exp(np.array([rng.normal() for _ in range(1000)]))
        lam, shift = fit_lambda(column)
        assert shift == 0.0
        assert -0.2 <= lam <= 0.2

    def test_gaussian_column_keeps_identity_region(self):
        rng = stream(5, "gauss")
        column = np.array([10.0 + rng.normal() for _ in range(1000)])
        lam, _ = fit_lambda(column)
        assert 0.7 <= lam <= 1.3

    def test_shift_rule_for_zero(self):
        _, shift = fit_lambda(np.array([0.0, 1.0, 2.0, 5.0]))
        assert shift == 1.0
        assert positivity_shift([-2.0, 4.0]) == 3.0
        assert positivity_shift([0.5, 4.0]) == 0.0

    def test_constant_column_rejected(self):
        with pytest.raises(DegenerateColumn):
            fit_lambda([3.0, 3.0, 3.0])

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            fit_lambda([1.0, 2.0])

    def test_lambda_stays_on_grid(self):
        rng = stream(88, "grid")
        column = np.abs(np.array([rng.normal() for _ in range(50)])) + 0.1
        lam, _ = fit_lambda(column)
        assert -5.0 <= lam <= 5.0


class TestZscore:
    def test_simple_column(self):
        out, flags = zscore_columns([[1.0], [2.0], [3.0]])
        assert out[:, 0].tolist() == pytest.approx([-1.0, 0.0, 1.0], abs=1e-15)
        assert not flags[0]

    def test_constant_column_flagged(self):
        out, flags = zscore_columns([[7.0, 1.0], [7.0, 2.0], [7.0, 3.0]])
        assert out[:, 0].tolist() == [0.0, 0.0, 0.0]
        assert flags[0] and not flags[1]

    def test_random_matrix_exact_standardization(self):
        rng = np.random.default_rng(31)
        matrix = rng.normal(size=(100, 4)) * 3.0 + 5.0
        out, flags = zscore_columns(matrix)
        assert not flags.any()
        for j in range(4):
            mean, std = fsum_mean_std(out[:, j])
            assert abs(mean) <= 1e-12
            assert abs(std - 1.0) <= 1e-12

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        matrix = rng.lognormal(size=(60, 3))
        once, _ = zscore_columns(matrix)
        twice, _ = zscore_columns(once)
        assert np.abs(twice - once).max() <= 1e-12

    def test_too_few_rows(self):
        with pytest.raises(TooFewSamples):
            zscore_columns([[1.0, 2.0]])


class TestBcZscore:
    def test_vector_with_unit_lambda_params(self):
        params = [ColumnParams(lam=1.0, shift=0.0, mean=1.0, std=1.0)]
        out, _ = bc_zscore(np.array([1.0, 2.0, 3.0]), params)
        assert out.tolist() == pytest.approx([-1.0, 0.0, 1.0], abs=1e-15)

    def test_matrix_output_standardized(self):
        rng = stream(12, "table")
        matrix = np.array([[math.exp(rng.normal()) for _ in range(6)] for _ in range(40)])
        out, params = bc_zscore(matrix)
        assert len(params) == 6
        for j in range(6):
            mean, std = fsum_mean_std(out[:, j])
            assert abs(mean) <= 1e-12
            assert abs(std - 1.0) <= 1e-12

    def test_three_axis_shape_bookkeeping(self):
        arr = np.arange(1.0, 25.0).reshape(2, 3, 4)
        params = [ColumnParams(lam=1.0, shift=0.0, mean=0.0, std=1.0) for _ in range(12)]
        out, back = bc_zscore(arr, params)
        assert out.shape == (2, 3, 4)
        assert len(back) == 12
        assert np.array_equal(out, arr - 1.0)  # lam 1 then (y-0)/1

    def test_fit_then_reuse_is_bit_identical(self):
        rng = stream(9, "reuse")
        matrix = np.array([[math.exp(rng.normal()) for _ in range(3)] for _ in range(50)])
        fitted, params = bc_zscore(matrix)
        replayed, _ = bc_zscore(matrix, params)
        assert np.array_equal(fitted, replayed)

    def test_degenerate_column_survives(self):
        matrix = np.array([[7.0, 1.0], [7.0, 2.0], [7.0, 4.0]])
        out, params = bc_zscore(matrix)
        assert params[0].degenerate
        assert out[:, 0].tolist() == [0.0, 0.0, 0.0]
        assert not params[1].degenerate

    def test_params_length_checked(self):
        with pytest.raises(ParamsMismatch):
            bc_zscore(np.ones((4, 2)), [ColumnParams(1.0, 0.0, 0.0, 1.0)])

    def test_order_statistics_preserved(self):
        rng = stream(77, "mono")
        column = np.array([math.exp(rng.normal() * 2.0) for _ in range(200)])
        out, _ = bc_zscore(column)
        assert np.array_equal(np.argsort(column, kind="stable"), np.argsort(out, kind="stable"))

    def test_skew_repair_on_lognormal(self):
        rng = stream(2024, "lognormal")
        column = np.exp(np.array([rng.normal() for _ in range(1000)]))
        before = column_stats(column).skewness
        out, params = bc_zscore(column)
        after = column_stats(out).skewness
        assert abs(after) < abs(before)
        assert abs(after) < 0.3
        assert -0.2 <= params[0].lam <= 0.2
