"""Attended temperature scaling: a temperature loss over per-class sample sets.

Each class k owns a member set M_k mixing samples truly of class k with
surrogate samples borrowed from other classes.  The loss term for member
i of M_k is

    -log( s_k * (1 - s_{y_i}) / (1 - s_k) )

with ``s`` the tempered softmax row of sample i.  For members whose true
label is k the term reduces algebraically to the plain NLL term
``-log s_k``; for binary problems with mislabeled members it reduces to
``-log(s_k^2 / (1 - s_k))``.

The expression inside the log is treated as a member likelihood and
clamped into [1e-12, 1] before taking the log, the same clamping the
metrics apply to probabilities.  The upper clamp matters: for surrogate
members predicted as class k the raw ratio grows without bound as the
temperature shrinks, so the unclamped loss has no minimizer and every
fit would run to the lower search bound.  True-class members are never
affected (their ratio is the probability ``s_k`` itself).

The membership rule that selects surrogates is pluggable.  The built-in
default places each sample in its true class's set and, when
misclassified, additionally in its predicted class's set; pass explicit
per-class index lists to substitute any external selection mechanism.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import LogitDataset, TemperatureFit, validate_dataset
from .optimize import ScalarSearchConfig, minimize_scalar
from .scaling import softmax_rows

_CLAMP = 1e-12
_LOG_CLAMP = float(np.log(1e-12))


@dataclass(frozen=True)
class AttendedAssignment:
    """Per-class member index sets; a sample may belong to several sets."""

    membership: tuple[np.ndarray, ...]
    rule: str

    def __post_init__(self):
        if self.rule not in ("default", "external"):
            raise ValueError(f"rule must be 'default' or 'external', got {self.rule!r}")
        frozen = []
        for k, idx in enumerate(self.membership):
            arr = np.asarray(idx, dtype=np.int64)
            if arr.ndim != 1:
                raise ValueError(f"member set {k} must be a flat index list")
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "membership", tuple(frozen))

    @property
    def class_count(self) -> int:
        return len(self.membership)

    def member_count(self) -> int:
        return sum(idx.size for idx in self.membership)


def build_assignment(ds: LogitDataset,
                     rule: str | Sequence[Sequence[int]] = "default") -> AttendedAssignment:
    """Construct per-class member sets from labels, or validate external ones."""
    if ds.labels is None:
        raise ValueError("labels required")
    validate_dataset(ds)
    k = ds.class_count
    if isinstance(rule, str):
        if rule != "default":
            raise ValueError(f"unknown rule {rule!r}")
        predicted = ds.logits.argmax(axis=1)
        membership = []
        for c in range(k):
            own = ds.labels == c
            borrowed = (predicted == c) & ~own
            membership.append(np.flatnonzero(own | borrowed))
        return AttendedAssignment(tuple(membership), "default")
    sets = [np.asarray(list(idx), dtype=np.int64) for idx in rule]
    if len(sets) != k:
        raise ValueError(f"need {k} member sets, got {len(sets)}")
    for c, idx in enumerate(sets):
        if idx.size and (idx.min() < 0 or idx.max() >= ds.sample_count):
            raise ValueError(f"member set {c} contains an index outside "
                             f"[0, {ds.sample_count})")
    return AttendedAssignment(tuple(sets), "external")


def attended_loss(ds: LogitDataset, assignment: AttendedAssignment,
                  temperature: float) -> float:
    """Summed attended loss at one temperature."""
    if ds.labels is None:
        raise ValueError("labels required")
    if assignment.class_count != ds.class_count:
        raise ValueError(f"assignment has {assignment.class_count} classes, "
                         f"dataset has {ds.class_count}")
    probs = np.clip(softmax_rows(ds.logits, temperature), _CLAMP, 1.0 - _CLAMP)
    log_probs = np.log(probs)
    log_complement = np.log1p(-probs)
    total = 0.0
    for k, members in enumerate(assignment.membership):
        if members.size == 0:
            continue
        y = ds.labels[members]
        # complement terms subtracted first: for y == k they are the same
        # float, the difference is exactly zero, and the term is exactly
        # log s_k, untouched by the likelihood clamp below
        log_ratio = log_probs[members, k] + (log_complement[members, y]
                                             - log_complement[members, k])
        total -= float(np.sum(np.clip(log_ratio, _LOG_CLAMP, 0.0)))
    return total


def fit_ats(calib: LogitDataset,
            rule: str | Sequence[Sequence[int]] | AttendedAssignment = "default",
            config: ScalarSearchConfig | None = None) -> TemperatureFit:
    """Minimize the attended loss over the temperature."""
    if isinstance(rule, AttendedAssignment):
        assignment = rule
    else:
        assignment = build_assignment(calib, rule)
    if assignment.member_count() == 0:
        raise ValueError("empty assignment: every member set is empty")
    result = minimize_scalar(lambda t: attended_loss(calib, assignment, t), config)
    return TemperatureFit(
        temperature=result.argmin,
        final_loss=result.value,
        iterations=result.iterations,
        converged=result.converged,
    )
