"""Calibration and accuracy metrics: NLL, ECE, Brier score, reliability bins.

Binning rule for ECE and reliability diagrams: ``bin_count`` equal-width
intervals over (0, 1], left-open and right-closed, with confidence 0
assigned to bin 1.  Bin edges are computed as ``b / bin_count`` so that an
independent interval-comparison oracle reproduces the binning exactly.

Reduction orders are fixed for bit-stable results: NLL and Brier sum over
samples in row order with numpy's pairwise reduction; per-bin confidence
and correctness sums accumulate sequentially in sample order, and the ECE
total accumulates sequentially in bin order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import ProbabilityMatrix

PROBABILITY_FLOOR = 1e-12
DEFAULT_BIN_COUNT = 15


def _as_probs(probs) -> np.ndarray:
    if isinstance(probs, ProbabilityMatrix):
        return probs.probs
    return ProbabilityMatrix(np.asarray(probs, dtype=np.float64)).probs


def _as_labels(labels, n_samples: int, n_classes: int) -> np.ndarray:
    if labels is None:
        raise ValueError("labels required")
    arr = np.asarray(labels)
    if arr.ndim != 1 or arr.shape[0] != n_samples:
        raise ValueError(f"labels must be a vector of length {n_samples}")
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError("labels must be integers")
    if arr.size and ((arr < 0).any() or (arr >= n_classes).any()):
        raise ValueError(f"labels must lie in [0, {n_classes})")
    return arr.astype(np.int64)


def nll(probs, labels, reduction: str = "mean") -> float:
    """Negative log-likelihood of the true classes.

    Probabilities are floored at 1e-12 before the log, here only; the loss
    is otherwise unbounded at zero probability.
    """
    p = _as_probs(probs)
    y = _as_labels(labels, p.shape[0], p.shape[1])
    if p.shape[0] == 0:
        raise ValueError("empty dataset")
    if reduction not in ("mean", "sum"):
        raise ValueError(f"reduction must be 'mean' or 'sum', got {reduction!r}")
    picked = np.maximum(p[np.arange(p.shape[0]), y], PROBABILITY_FLOOR)
    total = -np.sum(np.log(picked))
    return float(total if reduction == "sum" else total / p.shape[0])


def accuracy(probs, labels) -> float:
    """Fraction of samples whose argmax matches the label (ties -> lowest index)."""
    p = _as_probs(probs)
    y = _as_labels(labels, p.shape[0], p.shape[1])
    if p.shape[0] == 0:
        raise ValueError("empty dataset")
    return float(np.mean(p.argmax(axis=1) == y))


def brier(probs, labels) -> float:
    """Mean squared error against the one-hot label, divided by the class count.

    Note the 1/K normalization: per-sample values lie in [0, 2/K], not the
    [0, 2] range of the unnormalized multiclass Brier score used by some
    other toolkits.
    """
    p = _as_probs(probs)
    y = _as_labels(labels, p.shape[0], p.shape[1])
    if p.shape[0] == 0:
        raise ValueError("empty dataset")
    onehot = np.zeros_like(p)
    onehot[np.arange(p.shape[0]), y] = 1.0
    per_sample = ((p - onehot) ** 2).sum(axis=1) / p.shape[1]
    return float(per_sample.mean())


@dataclass(frozen=True)
class ReliabilityBins:
    """Per-bin sample counts, mean confidences, and accuracies.

    Bin ``b`` (1-based) covers ((b-1)/B, b/B]. Empty bins report 0.0 for
    both mean confidence and accuracy so serialized reports stay NaN-free.
    """

    bin_count: int
    counts: np.ndarray
    mean_confidence: np.ndarray
    bin_accuracy: np.ndarray

    def __post_init__(self):
        for name in ("counts", "mean_confidence", "bin_accuracy"):
            arr = np.asarray(getattr(self, name))
            if arr.shape != (self.bin_count,):
                raise ValueError(f"{name} must have shape ({self.bin_count},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def edges(self) -> np.ndarray:
        return np.arange(self.bin_count + 1) / self.bin_count

    def to_dict(self) -> dict:
        return {
            "bin_count": int(self.bin_count),
            "counts": [int(c) for c in self.counts],
            "mean_confidence": [float(c) for c in self.mean_confidence],
            "bin_accuracy": [float(a) for a in self.bin_accuracy],
        }


def reliability_bins(probs, labels, bin_count: int = DEFAULT_BIN_COUNT) -> ReliabilityBins:
    """Sort samples into equal-width confidence bins and summarize each."""
    if bin_count < 1:
        raise ValueError(f"bin_count must be >= 1, got {bin_count}")
    p = _as_probs(probs)
    y = _as_labels(labels, p.shape[0], p.shape[1])
    confidence = p.max(axis=1)
    correct = (p.argmax(axis=1) == y).astype(np.float64)
    edges = np.arange(bin_count + 1) / bin_count
    # first index b with edges[b] >= confidence, i.e. ((b-1)/B, b/B]; 0 -> bin 1
    idx = np.searchsorted(edges, confidence, side="left")
    idx = np.maximum(idx, 1) - 1
    counts = np.bincount(idx, minlength=bin_count)
    conf_sums = np.bincount(idx, weights=confidence, minlength=bin_count)
    correct_sums = np.bincount(idx, weights=correct, minlength=bin_count)
    nonempty = counts > 0
    mean_conf = np.zeros(bin_count)
    bin_acc = np.zeros(bin_count)
    mean_conf[nonempty] = conf_sums[nonempty] / counts[nonempty]
    bin_acc[nonempty] = correct_sums[nonempty] / counts[nonempty]
    return ReliabilityBins(bin_count, counts, mean_conf, bin_acc)


def ece(probs, labels, bin_count: int = DEFAULT_BIN_COUNT) -> float:
    """Expected calibration error: bin-weighted |accuracy - confidence| gap."""
    p = _as_probs(probs)
    y = _as_labels(labels, p.shape[0], p.shape[1])
    if p.shape[0] == 0:
        raise ValueError("empty dataset")
    bins = reliability_bins(p, y, bin_count)
    total = 0.0
    for b in range(bin_count):
        if bins.counts[b]:
            total += bins.counts[b] / p.shape[0] * abs(
                bins.bin_accuracy[b] - bins.mean_confidence[b])
    return float(total)


@dataclass(frozen=True)
class MetricsReport:
    """All four metrics plus the reliability table for one evaluation."""

    nll_mean: float
    ece: float
    brier_mean: float
    accuracy: float
    bins: ReliabilityBins

    def __post_init__(self):
        if not (self.nll_mean >= 0.0):
            raise ValueError(f"nll_mean must be >= 0, got {self.nll_mean}")
        for name in ("ece", "brier_mean", "accuracy"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    def to_dict(self) -> dict:
        return {
            "nll_mean": float(self.nll_mean),
            "ece": float(self.ece),
            "brier_mean": float(self.brier_mean),
            "accuracy": float(self.accuracy),
            "bins": self.bins.to_dict(),
        }


def evaluate(probs, labels, bin_count: int = DEFAULT_BIN_COUNT) -> MetricsReport:
    """Bundle NLL, ECE, Brier, accuracy, and reliability bins for one input."""
    p = _as_probs(probs)
    y = _as_labels(labels, p.shape[0], p.shape[1])
    return MetricsReport(
        nll_mean=nll(p, y, "mean"),
        ece=ece(p, y, bin_count),
        brier_mean=brier(p, y),
        accuracy=accuracy(p, y),
        bins=reliability_bins(p, y, bin_count),
    )
