"""Synthetic oracle: datasets with analytically known posteriors.

Generative model: true logits ``f_i ~ Normal(mu, sigma^2 I)`` with
per-class mean offsets ``mu``; labels drawn ``y_i ~ Categorical(softmax(f_i))``,
which makes ``softmax(f_i)`` the exact posterior by construction; observed
logits are ``w * f_i`` for a miscalibration factor ``w``.  Fitting a
temperature on the observed logits should therefore recover ``w``.

Randomness: PCG64 generators (``numpy.random.default_rng``) seeded from
``SeedSequence(seed, spawn_key=(stream,))`` with one fixed stream id per
purpose - 0: true logits, 1: labels, 2: marginal drift, 3: label noise.
Identical seeds reproduce datasets bit for bit; consumers of one stream
never perturb another.

Class priors are realized through the mean offsets, solved per class by
coarse iterative search on a pilot draw from a fixed, constant seed; the
uniform case uses zero offsets exactly.  Domain shift contracts the logit
scale (``sigma / (1 + severity)``), re-solves the offsets at the new scale
so the label marginal is invariant, and translates all class means by a
common severity-scaled constant.  The translation moves the logit
marginal without touching softmax outputs, and the re-solve keeps the
task distribution equal across domains, so only the sample marginal
changes while the label-given-logit rule is the same function in source
and target.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .data import LogitDataset, ProbabilityMatrix
from .scaling import softmax_rows
from .uts import ClassPriors

_STREAM_LOGITS = 0
_STREAM_LABELS = 1
_STREAM_DRIFT = 2
_STREAM_NOISE = 3

_PILOT_SEED = 20139871245
_PILOT_SIZE = 8192
_OFFSET_SWEEPS = 64


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator parameters for one synthetic dataset."""

    class_count: int
    sample_count: int
    logit_scale: float
    miscalibration: float
    seed: int
    priors: ClassPriors | None = None   # None means uniform

    def __post_init__(self):
        if self.class_count < 2:
            raise ValueError(f"class_count must be >= 2, got {self.class_count}")
        if self.sample_count < 1:
            raise ValueError(f"sample_count must be >= 1, got {self.sample_count}")
        if not self.logit_scale > 0.0:
            raise ValueError(f"logit_scale must be > 0, got {self.logit_scale}")
        if not self.miscalibration > 0.0:
            raise ValueError(f"miscalibration must be > 0, got {self.miscalibration}")
        if self.priors is not None and self.priors.class_count != self.class_count:
            raise ValueError(f"priors have {self.priors.class_count} classes, "
                             f"spec has {self.class_count}")

    def prior_vector(self) -> np.ndarray:
        if self.priors is None:
            return np.full(self.class_count, 1.0 / self.class_count)
        return self.priors.priors


@dataclass(frozen=True)
class SyntheticDataset:
    """Observed (miscalibrated) dataset plus its generating ground truth."""

    observed: LogitDataset
    true_logits: np.ndarray
    true_posterior: ProbabilityMatrix

    def __post_init__(self):
        arr = np.asarray(self.true_logits, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "true_logits", arr)

    @property
    def empirical_priors(self) -> ClassPriors:
        """Observed label frequencies, usable as the known task distribution."""
        counts = np.bincount(self.observed.labels,
                             minlength=self.observed.class_count)
        return ClassPriors(counts / self.observed.sample_count)


@lru_cache(maxsize=64)
def _class_offsets(priors_key: tuple, sigma: float, class_count: int) -> np.ndarray:
    """Mean offsets making E[softmax(mu + sigma Z)] match the priors.

    Solved by cycling per-class multiplicative corrections on a fixed
    pilot draw; a pure function of (priors, sigma, class_count).
    """
    priors = np.asarray(priors_key)
    if np.all(priors == priors[0]):
        offsets = np.zeros(class_count)
    else:
        pilot_rng = np.random.default_rng(np.random.SeedSequence(_PILOT_SEED))
        pilot = pilot_rng.standard_normal((_PILOT_SIZE, class_count)) * sigma
        offsets = np.zeros(class_count)
        for _ in range(_OFFSET_SWEEPS):
            implied = softmax_rows(pilot + offsets).mean(axis=0)
            offsets = offsets + np.log(priors / implied)
            offsets -= offsets.mean()
    offsets.setflags(write=False)
    return offsets


def class_offsets(priors: np.ndarray, sigma: float) -> np.ndarray:
    return _class_offsets(tuple(float(p) for p in priors), float(sigma), len(priors))


def _draw(spec: SyntheticSpec, offsets: np.ndarray, sigma: float,
          drift: float, scale: float, seed: int) -> SyntheticDataset:
    k, n = spec.class_count, spec.sample_count
    rng_f = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_STREAM_LOGITS,)))
    true_logits = (offsets + drift) + sigma * rng_f.standard_normal((n, k))
    posterior = softmax_rows(true_logits)
    rng_y = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_STREAM_LABELS,)))
    u = rng_y.random(n)
    labels = np.minimum((posterior.cumsum(axis=1) < u[:, None]).sum(axis=1), k - 1)
    observed = LogitDataset(scale * true_logits, labels.astype(np.int64))
    return SyntheticDataset(
        observed=observed,
        true_logits=true_logits,
        true_posterior=ProbabilityMatrix(posterior),
    )


def generate(spec: SyntheticSpec) -> SyntheticDataset:
    """Draw one dataset; deterministic given the spec's seed."""
    offsets = class_offsets(spec.prior_vector(), spec.logit_scale)
    return _draw(spec, offsets, spec.logit_scale, 0.0, spec.miscalibration, spec.seed)


def shift_domain(spec: SyntheticSpec, severity: float, target_scale: float,
                 seed: int | None = None) -> SyntheticDataset:
    """Covariate-shifted variant of a generator.

    Severity contracts the true-logit spread toward the decision
    boundaries, so samples get genuinely harder and the argmax
    classifier's accuracy degrades, while the label marginal and the
    conditional rule stay those of the source.  ``target_scale`` is the
    target domain's miscalibration factor.  With severity 0, the same
    target scale, and the same seed, the output is bit-identical to
    ``generate``.
    """
    if severity < 0.0:
        raise ValueError(f"severity must be >= 0, got {severity}")
    if not target_scale > 0.0:
        raise ValueError(f"target_scale must be > 0, got {target_scale}")
    if seed is None:
        seed = spec.seed
    sigma_t = spec.logit_scale / (1.0 + severity)
    offsets_t = class_offsets(spec.prior_vector(), sigma_t)
    rng_drift = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_STREAM_DRIFT,)))
    drift = severity * spec.logit_scale * float(rng_drift.standard_normal())
    return _draw(spec, offsets_t, sigma_t, drift, target_scale, seed)


def flip_labels(ds: LogitDataset, rate: float, seed: int) -> LogitDataset:
    """Replace each label with probability ``rate`` by a different class.

    Replacements are uniform over the other ``class_count - 1`` classes,
    so at rate 1.0 every label changes.  Deterministic given the seed.
    """
    if ds.labels is None:
        raise ValueError("labels required")
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_STREAM_NOISE,)))
    n, k = ds.sample_count, ds.class_count
    flip = rng.random(n) < rate
    jumps = rng.integers(1, k, size=n)
    labels = ds.labels.copy()
    labels[flip] = (labels[flip] + jumps[flip]) % k
    return LogitDataset(ds.logits, labels)
