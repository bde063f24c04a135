"""Scikit-learn style calibrators over exported logit matrices.

Every estimator takes an (n_samples, n_classes) logit matrix as ``X`` and
exposes ``fit`` / ``predict_proba`` / ``predict`` plus the usual
``get_params`` / ``set_params`` machinery, so calibrators compose with
pipelines, grid search, and cloning.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import affine, ats, ts, uts
from .data import LogitDataset
from .optimize import GradientDescentConfig, ScalarSearchConfig
from .scaling import affine_transform, softmax_rows


def validate_logits(X) -> np.ndarray:
    """Input check shared by all calibrators: finite 2-D float matrix, K >= 2."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"X must be 2-D (n_samples, n_classes), got shape {arr.shape}")
    if arr.shape[1] < 2:
        raise ValueError(f"X needs at least 2 classes, got {arr.shape[1]}")
    if not np.isfinite(arr).all():
        raise ValueError("X contains non-finite values")
    return arr


def validate_labels(y, n_samples: int, n_classes: int) -> np.ndarray:
    if y is None:
        raise ValueError("y (integer class labels) is required")
    arr = np.asarray(y)
    if arr.ndim != 1 or arr.shape[0] != n_samples:
        raise ValueError(f"y must be a vector of length {n_samples}")
    arr = arr.astype(np.int64)
    if arr.size and ((arr < 0).any() or (arr >= n_classes).any()):
        raise ValueError(f"y values must lie in [0, {n_classes})")
    return arr


class _ScaledSoftmaxMixin:
    """predict_proba / predict for temperature-style (argmax-preserving) fits."""

    def predict_proba(self, X):
        if getattr(self, "temperature_", None) is None:
            raise NotFittedError("call fit before predict_proba")
        return softmax_rows(validate_logits(X), self.temperature_)

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def transform(self, X):
        """Alias of predict_proba, so calibrators slot into pipelines."""
        return self.predict_proba(X)


class TemperatureScaling(_ScaledSoftmaxMixin, BaseEstimator):
    """Single-temperature calibration fitted by NLL on labeled logits.

    Attributes set by fit: ``temperature_``, ``fit_result_``.
    """

    def __init__(self, lower=1e-3, upper=1e3, tolerance=1e-6, max_iterations=200):
        self.lower = lower
        self.upper = upper
        self.tolerance = tolerance
        self.max_iterations = max_iterations

    def _search_config(self):
        return ScalarSearchConfig(lower=self.lower, upper=self.upper,
                                  tolerance=self.tolerance,
                                  max_iterations=self.max_iterations)

    def fit(self, X, y):
        X = validate_logits(X)
        y = validate_labels(y, X.shape[0], X.shape[1])
        fit = ts.fit_temperature(LogitDataset(X, y), self._search_config())
        self.temperature_ = fit.temperature
        self.fit_result_ = fit
        return self


class UnsupervisedTemperatureScaling(_ScaledSoftmaxMixin, BaseEstimator):
    """Label-free temperature calibration from logits plus class priors.

    ``priors`` is a vector of known class frequencies (None means
    uniform, which leaves the scale statistically unidentifiable; see
    ``tempcal.uts.fit_scale``).  ``y`` is accepted by fit for pipeline
    compatibility and ignored.  Attributes set by fit: ``temperature_``,
    ``scale_factor_``, ``fit_result_``.
    """

    def __init__(self, priors=None, lower=1e-3, upper=1e3, tolerance=1e-6,
                 max_iterations=200):
        self.priors = priors
        self.lower = lower
        self.upper = upper
        self.tolerance = tolerance
        self.max_iterations = max_iterations

    def fit(self, X, y=None):
        X = validate_logits(X)
        priors = (uts.ClassPriors.uniform(X.shape[1]) if self.priors is None
                  else uts.ClassPriors(np.asarray(self.priors, dtype=np.float64)))
        cfg = ScalarSearchConfig(lower=self.lower, upper=self.upper,
                                 tolerance=self.tolerance,
                                 max_iterations=self.max_iterations)
        fit = uts.fit_uts(LogitDataset(X), priors, cfg)
        self.temperature_ = fit.temperature
        self.scale_factor_ = fit.scale_factor
        self.fit_result_ = fit
        return self


class AttendedTemperatureScaling(_ScaledSoftmaxMixin, BaseEstimator):
    """Temperature fitted on per-class member sets mixing true and surrogate samples.

    ``assignment`` is None for the built-in membership rule or a sequence
    of per-class index lists for an external one.
    """

    def __init__(self, assignment=None, lower=1e-3, upper=1e3, tolerance=1e-6,
                 max_iterations=200):
        self.assignment = assignment
        self.lower = lower
        self.upper = upper
        self.tolerance = tolerance
        self.max_iterations = max_iterations

    def fit(self, X, y):
        X = validate_logits(X)
        y = validate_labels(y, X.shape[0], X.shape[1])
        cfg = ScalarSearchConfig(lower=self.lower, upper=self.upper,
                                 tolerance=self.tolerance,
                                 max_iterations=self.max_iterations)
        rule = "default" if self.assignment is None else self.assignment
        fit = ats.fit_ats(LogitDataset(X, y), rule, cfg)
        self.temperature_ = fit.temperature
        self.fit_result_ = fit
        return self


class _AffineScaling(BaseEstimator):
    _mode = "matrix"

    def __init__(self, learning_rate=0.01, max_iterations=5000,
                 gradient_tolerance=1e-6, l2_penalty=0.0):
        self.learning_rate = learning_rate
        self.max_iterations = max_iterations
        self.gradient_tolerance = gradient_tolerance
        self.l2_penalty = l2_penalty

    def fit(self, X, y):
        X = validate_logits(X)
        y = validate_labels(y, X.shape[0], X.shape[1])
        cfg = GradientDescentConfig(learning_rate=self.learning_rate,
                                    max_iterations=self.max_iterations,
                                    gradient_tolerance=self.gradient_tolerance,
                                    l2_penalty=self.l2_penalty)
        fit = affine.fit_affine(LogitDataset(X, y), self._mode, cfg)
        self.weight_ = fit.params.weight
        self.bias_ = fit.params.bias
        self.fit_result_ = fit
        return self

    def predict_proba(self, X):
        if getattr(self, "fit_result_", None) is None:
            raise NotFittedError("call fit before predict_proba")
        return softmax_rows(affine_transform(validate_logits(X),
                                             self.fit_result_.params))

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def transform(self, X):
        """Alias of predict_proba, so calibrators slot into pipelines."""
        return self.predict_proba(X)


class MatrixScaling(_AffineScaling):
    """Full affine logit transform fitted by NLL gradient descent."""

    _mode = "matrix"


class VectorScaling(_AffineScaling):
    """Diagonal affine logit transform fitted by NLL gradient descent."""

    _mode = "vector"
