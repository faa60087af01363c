import numpy as np
import pytest

from gridfuse.errors import NotSymmetric, TooFewSamples
from gridfuse.pca import covariance_matrix, principal_components, sym_eigen


class TestCovariance:
    def test_two_points_on_diagonal(self):
        cov = covariance_matrix([[0.0, 0.0], [1.0, 1.0]])
        assert cov.tolist() == [[0.5, 0.5], [0.5, 0.5]]

    def test_iid_columns_decorrelate(self):
        rng = np.random.default_rng(123)
        data = rng.normal(size=(10000, 2))
        cov = covariance_matrix(data)
        assert abs(cov[0, 1]) < 0.05

    def test_repeated_row_gives_zero(self):
        cov = covariance_matrix([[2.0, 3.0]] * 5)
        assert np.abs(cov).max() == 0.0

    def test_exactly_symmetric(self):
        rng = np.random.default_rng(5)
        cov = covariance_matrix(rng.normal(size=(40, 7)))
        assert np.array_equal(cov, cov.T)

    def test_too_few_rows(self):
        with pytest.raises(TooFewSamples):
            covariance_matrix([[1.0, 2.0]])


class TestSymEigen:
    def test_identity(self):
        values, vectors = sym_eigen(np.eye(3))
        assert values.tolist() == [1.0, 1.0, 1.0]
        assert np.array_equal(vectors, np.eye(3))

    def test_hand_solved_two_by_two(self):
        values, vectors = sym_eigen([[2.0, 1.0], [1.0, 2.0]])
        assert values == pytest.approx([3.0, 1.0], abs=1e-12)
        s = 1.0 / np.sqrt(2.0)
        assert np.abs(vectors[:, 0]) == pytest.approx([s, s], abs=1e-12)
        assert np.abs(vectors[:, 1]) == pytest.approx([s, s], abs=1e-12)
        assert vectors[:, 0] @ vectors[:, 1] == pytest.approx(0.0, abs=1e-12)

    def test_diagonal_matrix(self):
        values, vectors = sym_eigen(np.diag([5.0, 2.0, 9.0]))
        assert values.tolist() == [9.0, 5.0, 2.0]
        assert np.array_equal(np.abs(vectors), np.eye(3)[:, [2, 0, 1]])

    def test_rejects_asymmetric(self):
        with pytest.raises(NotSymmetric):
            sym_eigen([[1.0, 2.0], [0.5, 1.0]])

    def test_matches_lapack_oracle(self):
        rng = np.random.default_rng(42)
        for p in (2, 3, 5, 9, 16):
            matrix = rng.normal(size=(p, p))
            matrix = (matrix + matrix.T) / 2.0
            values, vectors = sym_eigen(matrix)
            reference = np.sort(np.linalg.eigvalsh(matrix))[::-1]
            assert np.abs(values - reference).max() <= 1e-9
            residual = matrix @ vectors - vectors * values
            assert np.abs(residual).max() <= 1e-9
            assert np.abs(vectors.T @ vectors - np.eye(p)).max() <= 1e-9

    def test_recovers_planted_spectrum(self):
        rng = np.random.default_rng(7)
        basis, _ = np.linalg.qr(rng.normal(size=(6, 6)))
        planted = np.array([9.0, 4.0, 2.5, 1.0, 0.5, 0.1])
        matrix = basis @ np.diag(planted) @ basis.T
        matrix = (matrix + matrix.T) / 2.0
        values, _ = sym_eigen(matrix)
        assert np.abs(values - planted).max() <= 1e-9

    def test_sign_convention(self):
        values, vectors = sym_eigen([[2.0, 1.0], [1.0, 2.0]])
        for k in range(2):
            lead = int(np.argmax(np.abs(vectors[:, k])))
            assert vectors[lead, k] > 0

    def test_trace_preserved(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            matrix = rng.normal(size=(6, 6))
            matrix = (matrix + matrix.T) / 2.0
            values, _ = sym_eigen(matrix)
            assert abs(values.sum() - np.trace(matrix)) <= 1e-9


class TestPrincipalComponents:
    def test_rank_one_data(self):
        rng = np.random.default_rng(3)
        direction = np.array([1.0, 2.0, -1.0])
        data = np.outer(rng.normal(size=200), direction) + 4.0
        result = principal_components(data, 0.95)
        assert result.retained == 1

    def test_isotropic_needs_all_components(self):
        rng = np.random.default_rng(11)
        data = rng.normal(size=(2000, 3))
        result = principal_components(data, 0.9)
        assert result.retained == 3
        assert result.explained_ratio.sum() == pytest.approx(1.0, abs=1e-9)

    def test_threshold_one_keeps_nonzero_rank(self):
        rng = np.random.default_rng(9)
        flat = rng.normal(size=(300, 2))
        data = np.hstack([flat, (flat[:, :1] + flat[:, 1:]) / 2.0])  # rank 2 in 3-D
        result = principal_components(data, 1.0)
        assert result.retained == 2

    def test_reconstruction_with_all_components(self):
        rng = np.random.default_rng(21)
        data = rng.normal(size=(80, 5)) @ np.diag([3.0, 2.0, 1.0, 0.5, 0.2])
        result = principal_components(data, 1.0)
        centered = data - result.mean
        scores = centered @ result.components.T
        rebuilt = scores @ result.components
        relative = np.linalg.norm(rebuilt - centered) / np.linalg.norm(centered)
        assert relative <= 1e-8

    def test_eigenvalues_nonnegative_descending(self):
        rng = np.random.default_rng(13)
        result = principal_components(rng.normal(size=(50, 6)), 0.85)
        values = result.eigenvalues
        assert (values >= 0).all()
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_threshold_validated(self):
        with pytest.raises(ValueError):
            principal_components(np.eye(3), 0.0)
        with pytest.raises(ValueError):
            principal_components(np.eye(3), 1.5)
