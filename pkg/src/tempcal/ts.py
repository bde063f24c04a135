"""Temperature scaling: fit a single softmax temperature by NLL on labeled data."""

from __future__ import annotations

import numpy as np

from .data import LogitDataset, ProbabilityMatrix, TemperatureFit, validate_dataset
from .optimize import ScalarSearchConfig, minimize_scalar
from .scaling import log_softmax_rows, softmax_rows, tempered_softmax


def _require_labels(ds: LogitDataset) -> np.ndarray:
    if ds.labels is None:
        raise ValueError("labels required")
    return ds.labels


def nll_sum_at(ds: LogitDataset, temperature: float) -> float:
    """Sum of true-class negative log-probabilities at one temperature."""
    y = _require_labels(ds)
    logp = log_softmax_rows(ds.logits, temperature)
    return float(-np.sum(logp[np.arange(ds.sample_count), y]))


def fit_temperature(calib: LogitDataset,
                    config: ScalarSearchConfig | None = None) -> TemperatureFit:
    """Find the temperature minimizing summed NLL on a labeled calibration set.

    The optimization objective is the sum (not the mean); the two share
    the same argmin and reports elsewhere use the mean.
    """
    _require_labels(calib)
    if calib.sample_count < 2:
        raise ValueError(f"need at least 2 samples to fit, got {calib.sample_count}")
    validate_dataset(calib)
    result = minimize_scalar(lambda t: nll_sum_at(calib, t), config)
    return TemperatureFit(
        temperature=result.argmin,
        final_loss=result.value,
        iterations=result.iterations,
        converged=result.converged,
    )


def stationarity_residual(calib: LogitDataset, temperature: float) -> float:
    """Per-sample optimality gap of the fitted temperature.

    At the NLL-minimizing temperature, the summed true-class logits equal
    the summed softmax-weighted logits; this returns the absolute
    difference of the two sums divided by the sample count, which is the
    (scaled) magnitude of d(NLL)/dT at the given temperature.
    """
    y = _require_labels(calib)
    probs = softmax_rows(calib.logits, temperature)
    true_side = np.sum(calib.logits[np.arange(calib.sample_count), y])
    weighted_side = np.sum(probs * calib.logits)
    return float(abs(true_side - weighted_side) / calib.sample_count)


def apply(ds: LogitDataset, fit: TemperatureFit) -> ProbabilityMatrix:
    """Calibrated probabilities: tempered softmax at the fitted temperature."""
    return tempered_softmax(ds.logits, fit.temperature)
