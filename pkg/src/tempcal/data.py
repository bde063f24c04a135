"""Core containers: logit datasets, probability matrices, fit results, splits.

All containers are immutable after construction (arrays are locked
read-only), so they can be shared across threads without copying.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ROW_SUM_TOLERANCE = 1e-9


def _frozen_array(values, dtype=None) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if arr.flags.writeable:
        if arr is values or (isinstance(values, np.ndarray) and arr.base is values):
            arr = arr.copy()
        arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LogitDataset:
    """Per-sample logit vectors plus optional integer class labels.

    ``logits`` has shape (n_samples, n_classes) with n_classes >= 2.
    ``labels``, when present, is an integer vector of length n_samples
    with values in ``[0, n_classes)``; a dataset is either fully labeled
    or fully unlabeled.  Empty datasets (0 samples) are representable but
    rejected by every fitting routine.
    """

    logits: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        logits = np.asarray(self.logits, dtype=np.float64)
        if logits.ndim != 2:
            raise ValueError(f"logits must be 2-D, got shape {logits.shape}")
        if logits.shape[1] < 2:
            raise ValueError(f"at least 2 classes required, got {logits.shape[1]}")
        object.__setattr__(self, "logits", _frozen_array(logits))
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.ndim != 1 or labels.shape[0] != logits.shape[0]:
                raise ValueError(
                    f"labels must be a vector of length {logits.shape[0]}, "
                    f"got shape {labels.shape}"
                )
            if not np.issubdtype(labels.dtype, np.integer):
                raise ValueError(f"labels must be integers, got dtype {labels.dtype}")
            object.__setattr__(self, "labels", _frozen_array(labels, dtype=np.int64))

    @property
    def sample_count(self) -> int:
        return self.logits.shape[0]

    @property
    def class_count(self) -> int:
        return self.logits.shape[1]

    @property
    def is_labeled(self) -> bool:
        return self.labels is not None


@dataclass(frozen=True)
class ProbabilityMatrix:
    """Row-stochastic matrix of per-sample class probabilities."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 2:
            raise ValueError(f"probs must be 2-D, got shape {probs.shape}")
        if probs.size and (probs.min() < 0.0 or probs.max() > 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if probs.size:
            sums = probs.sum(axis=1)
            worst = np.abs(sums - 1.0).max()
            if worst > ROW_SUM_TOLERANCE:
                raise ValueError(f"rows must sum to 1 within {ROW_SUM_TOLERANCE}, "
                                 f"worst deviation {worst:.3e}")
        object.__setattr__(self, "probs", _frozen_array(probs))

    @property
    def sample_count(self) -> int:
        return self.probs.shape[0]

    @property
    def class_count(self) -> int:
        return self.probs.shape[1]


@dataclass(frozen=True)
class TemperatureFit:
    """Fitted temperature with optimizer diagnostics.

    ``scale_factor`` is only set by the unsupervised fitter: the estimated
    factor by which the model's logits are rescaled relative to calibrated
    logits.
    """

    temperature: float
    final_loss: float
    iterations: int
    converged: bool
    scale_factor: float | None = None

    def __post_init__(self):
        if not (self.temperature > 0.0):
            raise ValueError(f"temperature must be > 0, got {self.temperature}")
        if self.scale_factor is not None and not (self.scale_factor > 0.0):
            raise ValueError(f"scale_factor must be > 0, got {self.scale_factor}")


@dataclass(frozen=True)
class Partition:
    """Disjoint calibration/test index sets over one dataset."""

    calibration_indices: np.ndarray
    test_indices: np.ndarray
    seed: int

    def __post_init__(self):
        cal = _frozen_array(self.calibration_indices, dtype=np.int64)
        test = _frozen_array(self.test_indices, dtype=np.int64)
        for name, idx in (("calibration", cal), ("test", test)):
            if idx.ndim != 1:
                raise ValueError(f"{name} indices must be a vector")
            if idx.size and (np.unique(idx).size != idx.size or idx.min() < 0):
                raise ValueError(f"{name} indices must be unique and non-negative")
        if np.intersect1d(cal, test).size:
            raise ValueError("calibration and test indices overlap")
        object.__setattr__(self, "calibration_indices", cal)
        object.__setattr__(self, "test_indices", test)


def validate_dataset(ds: LogitDataset) -> LogitDataset:
    """Check every dataset invariant, reporting the first violation found.

    Returns ``ds`` unchanged when all logits are finite and, if labels are
    present, every label lies in ``[0, class_count)``.
    """
    finite = np.isfinite(ds.logits)
    if not finite.all():
        row, col = np.argwhere(~finite)[0]
        raise ValueError(f"non-finite logit at ({row}, {col})")
    if ds.labels is not None and ds.labels.size:
        bad = (ds.labels < 0) | (ds.labels >= ds.class_count)
        if bad.any():
            row = int(np.argmax(bad))
            raise ValueError(
                f"label out of range at row {row}: {ds.labels[row]} "
                f"not in [0, {ds.class_count})"
            )
    return ds


def split(ds: LogitDataset, calibration_fraction: float, seed: int) -> Partition:
    """Randomly partition sample indices into calibration and test sets.

    The calibration side receives ``round(fraction * n)`` samples (ties
    rounded up); both sides must end up non-empty.  The same seed always
    yields the same partition.
    """
    if not 0.0 < calibration_fraction < 1.0:
        raise ValueError(f"calibration_fraction must be in (0, 1), got {calibration_fraction}")
    n = ds.sample_count
    n_cal = int(np.floor(calibration_fraction * n + 0.5))
    if n < 2 or n_cal < 1 or n - n_cal < 1:
        raise ValueError(
            f"dataset with {n} samples cannot be split at fraction {calibration_fraction}"
        )
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    perm = rng.permutation(n)
    return Partition(
        calibration_indices=np.sort(perm[:n_cal]),
        test_indices=np.sort(perm[n_cal:]),
        seed=seed,
    )


def take(ds: LogitDataset, indices: np.ndarray) -> LogitDataset:
    """Row-subset of a dataset, preserving labeledness."""
    labels = None if ds.labels is None else ds.labels[indices]
    return LogitDataset(ds.logits[indices], labels)


def drop_labels(ds: LogitDataset) -> LogitDataset:
    """Label-free view of a dataset; logit values are shared, not copied."""
    if ds.labels is None:
        return ds
    return LogitDataset(ds.logits, None)
