"""Shared fixtures: synthetic datasets reused across test modules."""

import numpy as np
import pytest

from tempcal import ClassPriors, SyntheticSpec, generate

K = 10
SIGMA = 2.0


def skewed_prior_vector(k: int = K) -> np.ndarray:
    weights = np.arange(k, 0, -1, dtype=np.float64)
    return weights / weights.sum()


@pytest.fixture(scope="session")
def skewed_priors() -> ClassPriors:
    return ClassPriors(skewed_prior_vector())


@pytest.fixture(scope="session")
def uniform_set():
    """K=10, L=10^4, sigma=2, miscalibration 2.5, uniform priors, seed 1."""
    return generate(SyntheticSpec(class_count=K, sample_count=10_000,
                                  logit_scale=SIGMA, miscalibration=2.5, seed=1))


@pytest.fixture(scope="session")
def calibrated_set():
    """Same construction but already calibrated (factor 1)."""
    return generate(SyntheticSpec(class_count=K, sample_count=10_000,
                                  logit_scale=SIGMA, miscalibration=1.0, seed=1))


@pytest.fixture(scope="session")
def skewed_set(skewed_priors):
    """Skewed-prior variant used wherever the label-free fitter needs identification."""
    return generate(SyntheticSpec(class_count=K, sample_count=20_000,
                                  logit_scale=SIGMA, miscalibration=2.5, seed=1,
                                  priors=skewed_priors))
