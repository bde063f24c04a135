"""Matrix and vector scaling: affine logit transforms fitted by NLL descent."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import LogitDataset, ProbabilityMatrix, validate_dataset
from .metrics import PROBABILITY_FLOOR
from .optimize import GradientDescentConfig, minimize_gd
from .scaling import AffineParams, affine_transform, softmax_rows

MODES = ("matrix", "vector")


@dataclass(frozen=True)
class AffineFit:
    params: AffineParams
    mode: str
    final_loss: float
    iterations: int
    converged: bool

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "vector" and not self.params.is_diagonal():
            raise ValueError("vector-mode fit must have a diagonal weight matrix")


def _mean_nll_of_rows(z: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean NLL of softmax(z) plus the softmax probabilities, floor as in metrics."""
    n = z.shape[0]
    zs = z - z.max(axis=1, keepdims=True)
    probs = np.exp(zs)
    probs /= probs.sum(axis=1, keepdims=True)
    picked = np.maximum(probs[np.arange(n), labels], PROBABILITY_FLOOR)
    return float(-np.sum(np.log(picked)) / n), probs


def _pack_problem(calib: LogitDataset, mode: str):
    """Objective/gradient closure and identity init for one fitting mode.

    Vector mode parameterizes only the diagonal and the bias, which is the
    exact projection of off-diagonal gradients to zero: those entries never
    exist, so they stay 0.0 at every step.
    """
    logits = calib.logits
    labels = calib.labels
    n, k = calib.sample_count, calib.class_count
    onehot = np.zeros((n, k))
    onehot[np.arange(n), labels] = 1.0

    if mode == "vector":
        def value_and_grad(p):
            diag, bias = p[:k], p[k:]
            loss, probs = _mean_nll_of_rows(logits * diag + bias, labels)
            grad_z = (probs - onehot) / n
            return loss, np.concatenate([(grad_z * logits).sum(axis=0),
                                         grad_z.sum(axis=0)])
        init = np.concatenate([np.ones(k), np.zeros(k)])
    else:
        def value_and_grad(p):
            weight, bias = p[:k * k].reshape(k, k), p[k * k:]
            loss, probs = _mean_nll_of_rows(logits @ weight.T + bias, labels)
            grad_z = (probs - onehot) / n
            return loss, np.concatenate([(grad_z.T @ logits).ravel(),
                                         grad_z.sum(axis=0)])
        init = np.concatenate([np.eye(k).ravel(), np.zeros(k)])
    return value_and_grad, init


def fit_affine(calib: LogitDataset, mode: str,
               config: GradientDescentConfig | None = None) -> AffineFit:
    """Fit ``softmax(weight @ f + bias)`` to labels by full-batch descent.

    Starts from the identity transform, so the initial objective equals
    the uncalibrated mean NLL and the fitted loss can only improve on it.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if calib.labels is None:
        raise ValueError("labels required")
    validate_dataset(calib)
    n, k = calib.sample_count, calib.class_count
    if n < k:
        raise ValueError(f"need at least {k} samples, got {n}")
    if mode == "matrix" and n < k * k:
        warnings.warn(
            f"matrix scaling fits {k * k + k} parameters from only {n} samples; "
            "expect overfitting",
            RuntimeWarning,
            stacklevel=2,
        )
    value_and_grad, init = _pack_problem(calib, mode)
    result = minimize_gd(value_and_grad, init, config)
    if mode == "vector":
        params = AffineParams(np.diag(result.params[:k]), result.params[k:])
    else:
        params = AffineParams(result.params[:k * k].reshape(k, k),
                              result.params[k * k:])
    return AffineFit(params=params, mode=mode, final_loss=result.value,
                     iterations=result.iterations, converged=result.converged)


def apply_affine(ds: LogitDataset, fit: AffineFit) -> ProbabilityMatrix:
    """Softmax of the affine-transformed logits.

    Unlike temperature-style methods, a non-diagonal or non-uniform
    transform can change the per-row argmax, and with it the accuracy.
    """
    return ProbabilityMatrix(softmax_rows(affine_transform(ds.logits, fit.params)))


def mean_nll_at(calib: LogitDataset, params: AffineParams) -> float:
    """Mean NLL of an arbitrary affine transform on a labeled set."""
    if calib.labels is None:
        raise ValueError("labels required")
    loss, _ = _mean_nll_of_rows(affine_transform(calib.logits, params), calib.labels)
    return loss
