import numpy as np
import pytest

from triscan.data import (
    ConstantColumnError,
    DatasetError,
    DimensionMismatchError,
    ExpressionDataset,
    JointCorrelation,
    MissingValueError,
    NonNumericValueError,
    as_sample_matrix,
    correlation_matrix,
    load_dataset,
    load_matrix,
    standardize_columns,
    write_dataset,
    write_matrix,
)

from oracles import naive_correlation_matrix


def small_dataset(seed=0, n=40, l=4, m=3):
    rng = np.random.default_rng(seed)
    return ExpressionDataset(rng.standard_normal((n, l)), rng.standard_normal((n, m)))


class TestAsSampleMatrix:
    def test_passthrough_shapes(self):
        assert as_sample_matrix(np.zeros((4, 2)) + 1.5).shape == (4, 2)
        assert as_sample_matrix([[1, 2, 3], [4, 5, 6]]).shape == (2, 3)

    def test_vector_becomes_column(self):
        assert as_sample_matrix([1.0, 2.0, 3.0]).shape == (3, 1)

    def test_rejects_3d(self):
        with pytest.raises(DatasetError):
            as_sample_matrix(np.zeros((2, 2, 2)))

    def test_rejects_empty(self):
        with pytest.raises(DatasetError):
            as_sample_matrix(np.zeros((0, 3)))

    def test_nan_reported_with_location(self):
        x = np.ones((3, 2))
        x[1, 1] = np.nan
        with pytest.raises(MissingValueError, match="row 2, column 2"):
            as_sample_matrix(x)

    def test_inf_rejected(self):
        x = np.ones((3, 2))
        x[0, 0] = np.inf
        with pytest.raises(DatasetError):
            as_sample_matrix(x)


class TestExpressionDataset:
    def test_auto_names(self):
        ds = small_dataset()
        assert ds.marker_names == ["L1", "L2", "L3", "L4"]
        assert ds.trait_names == ["T1", "T2", "T3"]

    def test_row_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            ExpressionDataset(np.ones((5, 2)) + np.eye(5, 2), np.zeros((4, 2)))

    def test_name_count_mismatch(self):
        rng = np.random.default_rng(1)
        with pytest.raises(DimensionMismatchError):
            ExpressionDataset(
                rng.standard_normal((5, 2)),
                rng.standard_normal((5, 2)),
                marker_names=["only-one"],
            )

    def test_constant_column_named(self):
        rng = np.random.default_rng(1)
        traits = rng.standard_normal((10, 3))
        traits[:, 1] = 7.0
        with pytest.raises(ConstantColumnError, match="T2"):
            ExpressionDataset(rng.standard_normal((10, 2)), traits)

    def test_single_sample_rejected(self):
        with pytest.raises(DatasetError):
            ExpressionDataset(np.ones((1, 2)), np.ones((1, 2)))


class TestCorrelationMatrix:
    def test_matches_naive_pearson(self):
        ds = small_dataset(seed=3, n=25)
        joint = np.hstack([ds.markers, ds.traits])
        expected = naive_correlation_matrix([joint[:, c] for c in range(joint.shape[1])])
        got = correlation_matrix(ds).matrix
        assert np.abs(got - expected).max() <= 1e-12

    def test_identical_columns_correlate_to_one(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(30)
        ds = ExpressionDataset(x.reshape(-1, 1), np.column_stack([x, -x]))
        corr = correlation_matrix(ds)
        assert corr.matrix[0, 1] == pytest.approx(1.0, abs=1e-12)
        assert corr.matrix[0, 2] == pytest.approx(-1.0, abs=1e-12)
        assert corr.matrix[1, 2] == pytest.approx(-1.0, abs=1e-12)

    def test_blocks_and_triplet_agree(self):
        ds = small_dataset(seed=5)
        corr = correlation_matrix(ds)
        assert corr.marker_trait.shape == (4, 3)
        assert corr.trait_trait.shape == (3, 3)
        r12, r13, r23 = corr.triplet(2, 0, 1)
        assert r12 == corr.marker_trait[2, 0]
        assert r13 == corr.marker_trait[2, 1]
        assert r23 == corr.trait_trait[0, 1]

    def test_scale_and_shift_invariance(self):
        # moderate transforms only: a shift much larger than the scaled
        # spread would lose the correlation to cancellation in float64
        ds = small_dataset(seed=6)
        scaled = ExpressionDataset(
            ds.markers * 3.5 + 1.2, ds.traits * np.array([0.25, 40.0, 2.0]) - 7.5
        )
        a = correlation_matrix(ds).matrix
        b = correlation_matrix(scaled).matrix
        assert np.abs(a - b).max() <= 1e-10

    def test_standardized_data_gives_same_correlations(self):
        ds = small_dataset(seed=7)
        std = ExpressionDataset(
            standardize_columns(ds.markers), standardize_columns(ds.traits)
        )
        a = correlation_matrix(ds).matrix
        b = correlation_matrix(std).matrix
        assert np.abs(a - b).max() <= 1e-10


class TestJointCorrelationValidation:
    def test_asymmetric_rejected(self):
        bad = np.eye(3)
        bad[0, 1] = 0.5
        with pytest.raises(DatasetError):
            JointCorrelation(bad, 10, 1, 2)

    def test_bad_diagonal_rejected(self):
        bad = np.eye(3) * 0.9
        with pytest.raises(DatasetError):
            JointCorrelation(bad, 10, 1, 2)

    def test_out_of_range_rejected(self):
        bad = np.eye(3)
        bad[0, 1] = bad[1, 0] = 1.2
        with pytest.raises(DatasetError):
            JointCorrelation(bad, 10, 1, 2)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DatasetError):
            JointCorrelation(np.eye(4), 10, 1, 2)


class TestStandardize:
    def test_zero_mean_unit_sd(self):
        x = np.random.default_rng(8).standard_normal((50, 4)) * 9 + 2
        z = standardize_columns(x)
        assert np.abs(z.mean(axis=0)).max() <= 1e-12
        assert np.abs(z.std(axis=0) - 1.0).max() <= 1e-12

    def test_constant_column_rejected(self):
        with pytest.raises(ConstantColumnError):
            standardize_columns(np.ones((5, 2)))


class TestFileRoundTrip:
    def test_write_then_load_is_bit_exact(self, tmp_path):
        ds = small_dataset(seed=9)
        mp, tp = tmp_path / "m.tsv", tmp_path / "t.tsv"
        write_dataset(ds, mp, tp)
        back = load_dataset(mp, tp)
        assert np.array_equal(back.markers, ds.markers)
        assert np.array_equal(back.traits, ds.traits)
        assert back.marker_names == ds.marker_names
        assert back.trait_names == ds.trait_names

    def test_awkward_doubles_survive(self, tmp_path):
        values = np.array([[0.1, 1 / 3, np.pi], [1e-300, 1e300, -7.1e-12]])
        path = tmp_path / "x.tsv"
        write_matrix(path, ["a", "b", "c"], values)
        names, back = load_matrix(path)
        assert names == ["a", "b", "c"]
        assert np.array_equal(back, values)

    def test_missing_cell_reported_by_row_and_name(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("alpha\tbeta\n1.0\t2.0\n3.0\tNA\n")
        with pytest.raises(MissingValueError, match="row 2, column 'beta'"):
            load_matrix(path)

    def test_empty_cell_is_missing(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("alpha\tbeta\n\t2.0\n")
        with pytest.raises(MissingValueError, match="column 'alpha'"):
            load_matrix(path)

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("alpha\tbeta\n1.0\thigh\n")
        with pytest.raises(NonNumericValueError, match="'high'"):
            load_matrix(path)

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("alpha\tbeta\n1.0\n")
        with pytest.raises(DimensionMismatchError, match="row 1"):
            load_matrix(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.tsv"
        path.write_text("")
        with pytest.raises(DatasetError):
            load_matrix(path)

    def test_header_only(self, tmp_path):
        path = tmp_path / "header.tsv"
        path.write_text("a\tb\n")
        with pytest.raises(DatasetError):
            load_matrix(path)

    def test_row_count_mismatch_between_files(self, tmp_path):
        mp, tp = tmp_path / "m.tsv", tmp_path / "t.tsv"
        mp.write_text("L1\n0.0\n1.0\n")
        tp.write_text("T1\n0.5\n1.5\n2.5\n")
        with pytest.raises(DimensionMismatchError):
            load_dataset(mp, tp)
