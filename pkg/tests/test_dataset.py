"""CSV ingestion, standardization, stratified partitioning, subsampling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ruleens.dataset import (
    DataError,
    Dataset,
    IndexSubset,
    load_csv,
    standardize,
    stratified_kfold,
    stratified_split,
    subsample,
)


def write_csv(path, text):
    path.write_text(text)
    return str(path)


def make_dataset(n_per_class, n_attrs=3, seed=0, n_classes=2):
    rng = np.random.default_rng(seed)
    n = sum(n_per_class)
    x = rng.normal(size=(n, n_attrs))
    if n_classes == 2:
        labels = np.concatenate([np.full(c, v) for c, v in zip(n_per_class, (-1, 1))])
    else:
        labels = np.concatenate([np.full(c, j) for j, c in enumerate(n_per_class)])
    names = tuple(f"x{i}" for i in range(n_attrs))
    cls = ("-1", "+1") if n_classes == 2 else tuple(str(j) for j in range(n_classes))
    return Dataset(x, labels.astype(np.int64), names, cls)


class TestLoadCsv:
    def test_three_row_binary(self, tmp_path):
        p = write_csv(tmp_path / "t.csv", "a,b,y\n1,2,-1\n3,4,+1\n5,6,+1\n")
        d = load_csv(p, "y")
        assert d.observations.shape == (3, 2)
        assert d.attribute_names == ("a", "b")
        assert set(d.labels.tolist()) == {-1, 1}
        np.testing.assert_array_equal(d.labels, [-1, 1, 1])

    def test_numeric_pm1_maps_by_value_regardless_of_row_order(self, tmp_path):
        p = write_csv(tmp_path / "t.csv", "a,y\n1,+1\n2,-1\n3,+1\n")
        d = load_csv(p, "y")
        np.testing.assert_array_equal(d.labels, [1, -1, 1])

    def test_string_classes_sorted_for_stability(self, tmp_path):
        # malignant appears first but sorts second -> +1; stable across files
        p = write_csv(tmp_path / "t.csv", "a,y\n1,malignant\n2,benign\n")
        d = load_csv(p, "y")
        assert d.class_names == ("benign", "malignant")
        np.testing.assert_array_equal(d.labels, [1, -1])

    def test_multiclass_indices(self, tmp_path):
        p = write_csv(tmp_path / "t.csv", "a,y\n1,c\n2,a\n3,b\n4,a\n")
        d = load_csv(p, "y")
        assert d.class_names == ("a", "b", "c")
        np.testing.assert_array_equal(d.labels, [2, 0, 1, 0])

    def test_label_column_by_index(self, tmp_path):
        p = write_csv(tmp_path / "t.csv", "a,b,y\n1,2,-1\n3,4,1\n")
        d = load_csv(p, 2)
        assert d.attribute_names == ("a", "b")

    def test_non_numeric_cell_names_row_and_column(self, tmp_path):
        p = write_csv(tmp_path / "t.csv", "a,b,y\n1,abc,-1\n3,4,1\n")
        with pytest.raises(DataError, match=r"row 1.*'b'"):
            load_csv(p, "y")

    def test_unknown_label_column(self, tmp_path):
        p = write_csv(tmp_path / "t.csv", "a,b,y\n1,2,-1\n")
        with pytest.raises(DataError, match="label column"):
            load_csv(p, "z")

    def test_single_class_rejected(self, tmp_path):
        p = write_csv(tmp_path / "t.csv", "a,y\n1,pos\n2,pos\n")
        with pytest.raises(DataError, match="class"):
            load_csv(p, "y")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="open"):
            load_csv(str(tmp_path / "nope.csv"), "y")


class TestStandardize:
    def test_simple_column_frozen_values(self):
        d = make_dataset([2, 1], n_attrs=1)
        d = Dataset(np.array([[1.0], [2.0], [3.0]]), d.labels, ("a",), d.class_names)
        out, params = standardize(d)
        # oracle: population std of (1,2,3) is sqrt(2/3)
        s = math.sqrt(2.0 / 3.0)
        np.testing.assert_allclose(out.observations[:, 0], [-1.0 / s * 1, 0.0, 1.0 / s * 1])
        np.testing.assert_allclose(out.observations[0, 0], -1.224744871391589, atol=1e-12)
        assert params.means[0] == 2.0
        assert params.stds[0] == pytest.approx(s)

    def test_constant_column(self):
        d = make_dataset([2, 1], n_attrs=1)
        d = Dataset(np.array([[5.0], [5.0], [5.0]]), d.labels, ("a",), d.class_names)
        out, params = standardize(d)
        np.testing.assert_array_equal(out.observations[:, 0], np.zeros(3))
        assert params.stds[0] == 1.0

    def test_transform_reproduces_training_matrix_bitwise(self):
        d = make_dataset([10, 10], n_attrs=4, seed=3)
        out, params = standardize(d)
        again = params.transform(d.observations)
        assert np.array_equal(out.observations, again)

    def test_no_leakage_mean_zero_std_one(self):
        d = make_dataset([50, 50], n_attrs=5, seed=4)
        out, _ = standardize(d)
        np.testing.assert_allclose(out.observations.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(
            np.sqrt((out.observations**2).mean(axis=0)), 1.0, atol=1e-12
        )


class TestStratifiedSplit:
    def test_counts(self):
        d = make_dataset([10, 10])
        tr, te = stratified_split(d, {-1: 5, 1: 5}, seed=1)
        assert (tr.labels == -1).sum() == 5 and (tr.labels == 1).sum() == 5
        assert (te.labels == -1).sum() == 5 and (te.labels == 1).sum() == 5

    def test_take_entire_class(self):
        d = make_dataset([4, 6])
        tr, te = stratified_split(d, {-1: 4, 1: 2}, seed=1)
        assert (te.labels == -1).sum() == 0

    def test_same_seed_identical(self):
        d = make_dataset([8, 8])
        a = stratified_split(d, {-1: 3, 1: 5}, seed=9)
        b = stratified_split(d, {-1: 3, 1: 5}, seed=9)
        assert np.array_equal(a[0].observations, b[0].observations)
        assert np.array_equal(a[1].observations, b[1].observations)

    def test_over_request_rejected(self):
        d = make_dataset([4, 6])
        with pytest.raises(DataError):
            stratified_split(d, {-1: 5, 1: 2}, seed=0)

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_partition_exact(self, seed):
        d = make_dataset([7, 9], seed=2)
        tr, te = stratified_split(d, {-1: 3, 1: 4}, seed=seed)
        merged = np.vstack([tr.observations, te.observations])
        want = np.sort(d.observations[:, 0])
        assert np.array_equal(np.sort(merged[:, 0]), want)


class TestStratifiedKfold:
    def test_counts_100_60_40(self):
        d = make_dataset([60, 40])
        folds = stratified_kfold(d, 2, seed=0)
        assert len(folds) == 2
        for tr, te in folds:
            assert (te.labels == -1).sum() == 30 and (te.labels == 1).sum() == 20
            assert (tr.labels == -1).sum() == 30 and (tr.labels == 1).sum() == 20

    def test_k2_is_swap_pair(self):
        d = make_dataset([6, 6])
        (tr0, te0), (tr1, te1) = stratified_kfold(d, 2, seed=5)
        assert np.array_equal(np.sort(tr0.observations[:, 0]), np.sort(te1.observations[:, 0]))
        assert np.array_equal(np.sort(te0.observations[:, 0]), np.sort(tr1.observations[:, 0]))

    def test_fold_tests_partition_dataset(self):
        d = make_dataset([11, 7])
        folds = stratified_kfold(d, 3, seed=2)
        col = np.concatenate([te.observations[:, 0] for _, te in folds])
        assert np.array_equal(np.sort(col), np.sort(d.observations[:, 0]))
        counts = [(te.labels == -1).sum() for _, te in folds]
        assert max(counts) - min(counts) <= 1

    def test_small_class_rejected(self):
        d = make_dataset([2, 9])
        with pytest.raises(DataError):
            stratified_kfold(d, 3, seed=0)


class TestSubsample:
    def test_fraction(self):
        d = make_dataset([10, 10])
        assert len(subsample(d, 0.25, seed=0)) == 5

    def test_fraction_one_is_identity(self):
        d = make_dataset([10, 10])
        s = subsample(d, 1.0, seed=0)
        np.testing.assert_array_equal(s.indices, np.arange(20))

    def test_absolute_count(self):
        d = make_dataset([600, 400])
        assert len(subsample(d, 250, seed=1)) == 250

    def test_indices_sorted_unique_in_range(self):
        d = make_dataset([30, 30])
        s = subsample(d, 0.5, seed=7)
        assert np.all(np.diff(s.indices) > 0)
        assert s.indices.min() >= 0 and s.indices.max() < 60

    def test_determinism(self):
        d = make_dataset([30, 30])
        a = subsample(d, 17, seed=3)
        b = subsample(d, 17, seed=3)
        np.testing.assert_array_equal(a.indices, b.indices)

    def test_out_of_range(self):
        d = make_dataset([5, 5])
        with pytest.raises(DataError):
            subsample(d, 11, seed=0)
        with pytest.raises(DataError):
            subsample(d, 0, seed=0)
        with pytest.raises(DataError):
            subsample(d, -0.5, seed=0)


class TestIndexSubset:
    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            IndexSubset(np.array([1, 1, 2]))

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            IndexSubset(np.array([3, 1]))
