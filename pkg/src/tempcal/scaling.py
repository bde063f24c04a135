"""Tempered softmax and affine logit transforms: the shared numerical kernel.

All functions are pure and row-parallel.  Softmax rows are stabilized by
per-row max subtraction, so logits up to |f| ~ 1e4 are handled without
overflow; in double precision, naive exponentiation would already overflow
near |f/T| ~ 709.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LogitDataset, ProbabilityMatrix


def _check_logits(logits) -> np.ndarray:
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"logits must be 2-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("logits contain non-finite values")
    return arr


def softmax_rows(logits, temperature: float = 1.0) -> np.ndarray:
    """Raw-array tempered softmax; internal building block."""
    if not temperature > 0.0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    z = _check_logits(logits) / temperature
    z = z - z.max(axis=1, keepdims=True)
    np.exp(z, out=z)
    z /= z.sum(axis=1, keepdims=True)
    return z


def log_softmax_rows(logits, temperature: float = 1.0) -> np.ndarray:
    """Log of the tempered softmax, computed without underflow."""
    if not temperature > 0.0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    z = _check_logits(logits) / temperature
    z = z - z.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1, keepdims=True))
    return z - lse


def tempered_softmax(logits, temperature: float) -> ProbabilityMatrix:
    """Softmax of ``logits / temperature``, row by row.

    The per-row argmax equals the argmax of the raw logits for every
    temperature (logit gaps below double-precision resolution excepted),
    which is why temperature-style calibration never changes a
    classifier's predictions.
    """
    return ProbabilityMatrix(softmax_rows(logits, temperature))


def rescale_logits(logits, scale: float) -> np.ndarray:
    """Multiply every logit by a positive factor.

    ``tempered_softmax(rescale_logits(f, s), s)`` recovers
    ``tempered_softmax(f, 1)``: rescaling and an equal temperature cancel.
    """
    if not scale > 0.0:
        raise ValueError(f"scale must be > 0, got {scale}")
    return _check_logits(logits) * scale


@dataclass(frozen=True)
class AffineParams:
    """Dense affine map ``f -> weight @ f + bias`` on logit vectors."""

    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        weight = np.asarray(self.weight, dtype=np.float64)
        bias = np.asarray(self.bias, dtype=np.float64)
        if weight.ndim != 2 or weight.shape[0] != weight.shape[1]:
            raise ValueError(f"weight must be square, got shape {weight.shape}")
        if bias.shape != (weight.shape[0],):
            raise ValueError(f"bias must have shape ({weight.shape[0]},), got {bias.shape}")
        if not (np.isfinite(weight).all() and np.isfinite(bias).all()):
            raise ValueError("affine parameters must be finite")
        weight.setflags(write=False)
        bias.setflags(write=False)
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "bias", bias)

    @property
    def class_count(self) -> int:
        return self.bias.shape[0]

    def is_diagonal(self) -> bool:
        off = self.weight[~np.eye(self.class_count, dtype=bool)]
        return not off.any()

    @classmethod
    def identity(cls, class_count: int) -> "AffineParams":
        return cls(np.eye(class_count), np.zeros(class_count))


def affine_transform(logits, params: AffineParams) -> np.ndarray:
    """Apply ``f -> weight @ f + bias`` to every row."""
    arr = _check_logits(logits)
    if arr.shape[1] != params.class_count:
        raise ValueError(
            f"shape mismatch: logits have {arr.shape[1]} classes, "
            f"params expect {params.class_count}"
        )
    return arr @ params.weight.T + params.bias


def apply_temperature(ds: LogitDataset, temperature: float) -> ProbabilityMatrix:
    """Tempered softmax over a dataset's logits."""
    return tempered_softmax(ds.logits, temperature)
