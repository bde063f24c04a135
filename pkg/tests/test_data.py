import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempcal import (
    LogitDataset,
    Partition,
    ProbabilityMatrix,
    TemperatureFit,
    drop_labels,
    split,
    take,
    validate_dataset,
)


class TestLogitDataset:
    def test_well_formed_accepted(self):
        ds = LogitDataset([[1.0, 0.0], [0.0, 1.0]], [0, 1])
        assert validate_dataset(ds) is ds
        assert ds.sample_count == 2 and ds.class_count == 2 and ds.is_labeled

    def test_nan_reported_with_position(self):
        ds = LogitDataset([[1.0, 0.0], [np.nan, 1.0]], [0, 1])
        with pytest.raises(ValueError, match=r"non-finite logit at \(1, 0\)"):
            validate_dataset(ds)

    def test_label_equal_to_class_count_rejected(self):
        ds = LogitDataset([[1.0, 0.0], [0.0, 1.0]], [0, 2])
        with pytest.raises(ValueError, match="label out of range"):
            validate_dataset(ds)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="at least 2 classes"):
            LogitDataset([[1.0], [2.0]])

    def test_ragged_rows_rejected(self):
        with pytest.raises(ValueError):
            LogitDataset([[1.0, 2.0], [3.0]])

    def test_non_integer_labels_rejected(self):
        with pytest.raises(ValueError, match="integer"):
            LogitDataset([[1.0, 0.0]], [0.5])

    def test_empty_dataset_representable(self):
        ds = LogitDataset(np.empty((0, 3)))
        assert ds.sample_count == 0 and ds.class_count == 3
        assert validate_dataset(ds) is ds

    def test_arrays_are_read_only(self):
        ds = LogitDataset([[1.0, 0.0]], [0])
        with pytest.raises(ValueError):
            ds.logits[0, 0] = 5.0
        with pytest.raises(ValueError):
            ds.labels[0] = 1


class TestSplit:
    def test_counts_and_disjointness(self):
        ds = LogitDataset(np.zeros((10, 2)))
        part = split(ds, 0.2, seed=7)
        assert part.calibration_indices.size == 2
        assert part.test_indices.size == 8
        assert np.intersect1d(part.calibration_indices, part.test_indices).size == 0

    def test_deterministic(self):
        ds = LogitDataset(np.zeros((10, 2)))
        a, b = split(ds, 0.2, seed=7), split(ds, 0.2, seed=7)
        assert np.array_equal(a.calibration_indices, b.calibration_indices)
        assert np.array_equal(a.test_indices, b.test_indices)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError, match="cannot be split"):
            split(LogitDataset(np.zeros((1, 2))), 0.2, seed=0)

    def test_bad_fraction_rejected(self):
        ds = LogitDataset(np.zeros((10, 2)))
        for fraction in (0.0, 1.0, -0.5):
            with pytest.raises(ValueError):
                split(ds, fraction, seed=0)

    @given(n=st.integers(4, 200), frac=st.floats(0.05, 0.95), seed=st.integers(0, 2**32))
    @settings(max_examples=60, deadline=None)
    def test_partition_is_exhaustive_and_disjoint(self, n, frac, seed):
        n_cal = int(np.floor(frac * n + 0.5))
        if n_cal < 1 or n - n_cal < 1:
            return
        part = split(LogitDataset(np.zeros((n, 2))), frac, seed)
        union = np.union1d(part.calibration_indices, part.test_indices)
        assert np.array_equal(union, np.arange(n))
        assert part.calibration_indices.size == n_cal

    def test_overlapping_partition_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            Partition(np.array([0, 1]), np.array([1, 2]), seed=0)


class TestDropLabels:
    def test_logits_shared_bitwise(self):
        ds = LogitDataset([[1.5, -2.5], [0.25, 0.75]], [0, 1])
        bare = drop_labels(ds)
        assert bare.labels is None
        assert bare.logits is ds.logits

    def test_idempotent(self):
        ds = LogitDataset([[1.0, 2.0]])
        assert drop_labels(ds) is ds

    def test_empty_dataset(self):
        bare = drop_labels(LogitDataset(np.empty((0, 2))))
        assert bare.sample_count == 0 and bare.labels is None


class TestTake:
    def test_preserves_labels(self):
        ds = LogitDataset([[1.0, 0.0], [0.0, 1.0], [2.0, 2.0]], [0, 1, 0])
        sub = take(ds, np.array([2, 0]))
        assert np.array_equal(sub.labels, [0, 0])
        assert np.array_equal(sub.logits, [[2.0, 2.0], [1.0, 0.0]])


class TestFitAndProbabilityContainers:
    def test_temperature_must_be_positive(self):
        with pytest.raises(ValueError, match="temperature"):
            TemperatureFit(temperature=0.0, final_loss=1.0, iterations=3, converged=True)
        with pytest.raises(ValueError, match="scale_factor"):
            TemperatureFit(temperature=1.0, final_loss=1.0, iterations=3,
                           converged=True, scale_factor=-1.0)

    def test_probability_rows_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum to 1"):
            ProbabilityMatrix([[0.5, 0.4]])
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            ProbabilityMatrix([[1.5, -0.5]])
        pm = ProbabilityMatrix([[0.25, 0.75]])
        assert pm.class_count == 2
