"""Label-free temperature fitting from unlabeled logits plus known class priors.

The method runs in two sequential stages:

1. Estimate the factor ``w`` by which the model's logits are rescaled
   relative to calibrated logits, by matching the mean recalibrated class
   probabilities ``mean_i softmax(f_i / w)`` against the known class
   distribution (see ``fit_scale``).
2. Build per-class sample weights from the uncalibrated softmax's
   posterior odds at that factor, and minimize the weighted NLL over the
   temperature.

Sample weights for a non-predicted class k are ``odds_k ** (1/w)`` where
``odds_k = s_k / (1 - s_k)`` comes from the plain softmax of the supplied
logits; the predicted class always gets weight 1.  For binary problems
this power transform recovers the calibrated posterior odds exactly; for
more classes it is the documented approximation used here.

Objectives in this module reduce per-sample contributions in sorted
order, so fitted results are invariant to any permutation of the
calibration samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LogitDataset, TemperatureFit, drop_labels, validate_dataset
from .optimize import ScalarSearchConfig, ScalarSearchResult, minimize_scalar
from .scaling import log_softmax_rows, softmax_rows

_ODDS_CLAMP = 1e-12      # softmax clamp before the odds transform, singular at {0, 1}
_WEIGHT_FLOOR = 1e-300   # keeps weights strictly positive when the power underflows

PRIOR_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ClassPriors:
    """Known marginal class distribution, shared by source and target domains."""

    priors: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.priors, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] < 2:
            raise ValueError(f"priors must be a vector of >= 2 entries, got {arr.shape}")
        if (arr < 0.0).any():
            raise ValueError("priors must be non-negative")
        if abs(arr.sum() - 1.0) > PRIOR_SUM_TOLERANCE:
            raise ValueError(f"priors must sum to 1 within {PRIOR_SUM_TOLERANCE}, "
                             f"got sum {arr.sum()!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "priors", arr)

    @property
    def class_count(self) -> int:
        return self.priors.shape[0]

    @classmethod
    def uniform(cls, class_count: int) -> "ClassPriors":
        return cls(np.full(class_count, 1.0 / class_count))

    @classmethod
    def from_labels(cls, ds: LogitDataset) -> "ClassPriors":
        """Empirical class frequencies of a labeled (source/training) set."""
        if ds.labels is None:
            raise ValueError("labels required to compute empirical priors")
        if ds.sample_count == 0:
            raise ValueError("empty dataset")
        counts = np.bincount(ds.labels, minlength=ds.class_count)
        return cls(counts / ds.sample_count)


@dataclass(frozen=True)
class WeightMatrix:
    """Per-sample, per-class weights produced by ``class_weights``."""

    weights: np.ndarray
    scale: float

    def __post_init__(self):
        arr = np.asarray(self.weights, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"weights must be 2-D, got shape {arr.shape}")
        if not self.scale > 0.0:
            raise ValueError(f"scale must be > 0, got {self.scale}")
        if arr.size:
            if not np.isfinite(arr).all():
                raise ValueError("weights must be finite")
            if arr.min() <= 0.0:
                raise ValueError("weights must be strictly positive")
            if not (arr.max(axis=1) == 1.0).all():
                raise ValueError("every row must carry weight exactly 1 on its "
                                 "predicted class")
        arr.setflags(write=False)
        object.__setattr__(self, "weights", arr)


def class_weights(logits, scale: float) -> WeightMatrix:
    """Posterior-odds sample weights for every (sample, class) pair.

    Predicted class: weight 1.  Other classes: ``(s / (1 - s)) ** (1/scale)``
    with ``s`` the plain softmax probability of that class, clamped away
    from {0, 1}.  A sample sitting on the decision boundary (s = 0.5) gets
    weight 1; weights shrink as samples move away from a class.
    """
    if not scale > 0.0:
        raise ValueError(f"scale must be > 0, got {scale}")
    probs = np.clip(softmax_rows(logits), _ODDS_CLAMP, 1.0 - _ODDS_CLAMP)
    predicted = np.asarray(logits).argmax(axis=1)
    log_odds = np.log(probs) - np.log1p(-probs)
    rows = np.arange(probs.shape[0])
    log_odds[rows, predicted] = 0.0   # non-predicted log-odds are <= 0: no overflow
    weights = np.exp(log_odds / scale)
    weights[rows, predicted] = 1.0
    # non-predicted odds are mathematically <= 1; guard the <= against
    # last-ulp rounding of the softmax division near ties
    np.clip(weights, _WEIGHT_FLOOR, 1.0, out=weights)
    return WeightMatrix(weights=weights, scale=scale)


def _sorted_sum(values: np.ndarray) -> float:
    # order-independent reduction: canonicalize before summing
    return float(np.sum(np.sort(values)))


def _prior_mismatch(logits: np.ndarray, scale: float, priors: np.ndarray) -> float:
    probs = softmax_rows(logits, scale)
    n = probs.shape[0]
    gaps = [
        _sorted_sum(probs[:, k]) / n - priors[k]
        for k in range(probs.shape[1])
    ]
    return float(np.sum(np.square(gaps)))


def _fit_scale(calib: LogitDataset, priors: ClassPriors,
               config: ScalarSearchConfig | None = None) -> ScalarSearchResult:
    if calib.sample_count < calib.class_count:
        raise ValueError(
            f"need at least {calib.class_count} samples, got {calib.sample_count}"
        )
    if calib.class_count != priors.class_count:
        raise ValueError(
            f"priors have {priors.class_count} classes, dataset has {calib.class_count}"
        )
    if priors.priors.max() >= 1.0:
        raise ValueError("degenerate priors: one class holds all the mass")
    validate_dataset(calib)
    logits = calib.logits
    return minimize_scalar(lambda w: _prior_mismatch(logits, w, priors.priors), config)


def fit_scale(calib: LogitDataset, priors: ClassPriors,
              config: ScalarSearchConfig | None = None) -> float:
    """Estimate the logit rescaling factor from unlabeled data and priors.

    Minimizes the squared mismatch between the mean recalibrated class
    probabilities and the known class distribution over a bounded
    log-space search.  At the true factor the recalibrated probabilities
    are the true posteriors, whose per-class mean is exactly the class
    marginal, so the objective's population minimum sits at the true
    factor.  Labels, if present on the input, are ignored.

    Identification requires a non-uniform class distribution: under
    uniform priors, every candidate factor yields mean probabilities
    matching the priors (the logit scale and the rescaling factor are
    confounded), and the fitted value is then determined by sampling
    noise alone.
    """
    return _fit_scale(drop_labels(calib), priors, config).argmin


def weighted_nll(logits, weights, temperature: float, reduction: str = "sum") -> float:
    """Weighted negative log-likelihood over all (sample, class) pairs.

    ``-sum_i sum_k W[i, k] * log softmax(f_i / T)_k``, reduced as a sum or
    divided by the sample count.  With one-hot true-label indicator
    weights this is exactly the NLL.
    """
    w = weights.weights if isinstance(weights, WeightMatrix) else np.asarray(weights)
    logits = np.asarray(logits, dtype=np.float64)
    if w.shape != logits.shape:
        raise ValueError(f"shape mismatch: weights {w.shape} vs logits {logits.shape}")
    if reduction not in ("mean", "sum"):
        raise ValueError(f"reduction must be 'mean' or 'sum', got {reduction!r}")
    logp = log_softmax_rows(logits, temperature)
    per_sample = -(w * logp).sum(axis=1)
    total = _sorted_sum(per_sample)
    return total if reduction == "sum" else total / logits.shape[0]


def fit_uts(calib: LogitDataset, priors: ClassPriors,
            config: ScalarSearchConfig | None = None) -> TemperatureFit:
    """Two-stage label-free temperature fit.

    Consumes a label-stripped view of the input, so any labels present
    are provably never read: flipping or removing them cannot change the
    result.  Stage 1 estimates the rescaling factor; stage 2 minimizes
    the weighted NLL over the temperature with weights fixed at that
    factor.  The fitted factor is returned in ``scale_factor``.
    """
    unlabeled = drop_labels(calib)
    scale_result = _fit_scale(unlabeled, priors, config)
    weights = class_weights(unlabeled.logits, scale_result.argmin)
    logits = unlabeled.logits
    temp_result = minimize_scalar(
        lambda t: weighted_nll(logits, weights, t, "sum"), config
    )
    return TemperatureFit(
        temperature=temp_result.argmin,
        final_loss=temp_result.value,
        iterations=scale_result.iterations + temp_result.iterations,
        converged=scale_result.converged and temp_result.converged,
        scale_factor=scale_result.argmin,
    )
