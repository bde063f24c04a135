"""Experiment orchestration: repeated fits over sweeps, aggregated into reports.

Seeding scheme: every random decision inside a run derives its seed from
``SeedSequence((config.seed, repetition, purpose))`` with purpose ids
0: split, 1: condition perturbation, 2: dataset draw.  Reports are
therefore byte-identical across repeated runs of the same config.

Within one repetition every sweep condition is evaluated on the same
test indices; noise and size conditions perturb only the calibration
side (test rows are bitwise identical across conditions), while shift
conditions regenerate the domain at each severity over the same index
split.

Repetitions may run on a thread pool sized by the ``TEMPCAL_THREADS``
environment variable (default 1); records are assembled in repetition
order, so the report does not depend on scheduling.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .affine import apply_affine, fit_affine
from .ats import fit_ats
from .data import LogitDataset, split, take
from .io import load_dataset
from .metrics import MetricsReport, evaluate
from .optimize import GradientDescentConfig, ScalarSearchConfig
from .scaling import tempered_softmax
from .synth import SyntheticSpec, flip_labels, generate, shift_domain
from .ts import apply as apply_ts
from .ts import fit_temperature
from .uts import ClassPriors, fit_uts

METHODS = ("ts", "uts", "vector", "matrix", "ats")
SWEEPS = ("noise", "shift", "size")

_PURPOSE_SPLIT = 0
_PURPOSE_CONDITION = 1
_PURPOSE_DATASET = 2


def _derive_seed(*path: int) -> int:
    return int(np.random.SeedSequence(tuple(path)).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    method: str
    synth: SyntheticSpec | None = None
    calibration_path: str | None = None
    test_path: str | None = None
    priors: object = "uniform"           # "uniform" | "empirical" | explicit vector
    sweep: str | None = None
    sweep_values: tuple = ()
    seed: int = 0
    repetitions: int = 20
    calibration_fraction: float = 0.2
    bin_count: int = 15
    shift_target_scale: float | None = None
    scalar_search: ScalarSearchConfig = field(default_factory=ScalarSearchConfig)
    gradient_descent: GradientDescentConfig = field(default_factory=GradientDescentConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if (self.synth is None) == (self.calibration_path is None):
            raise ValueError("provide exactly one data source: synth or calibration_path")
        if self.sweep is not None:
            if self.sweep not in SWEEPS:
                raise ValueError(f"sweep must be one of {SWEEPS}, got {self.sweep!r}")
            if not self.sweep_values:
                raise ValueError("sweep_values must be non-empty")
            if self.sweep == "noise" and any(not 0.0 <= v <= 1.0 for v in self.sweep_values):
                raise ValueError("noise rates must lie in [0, 1]")
            if self.sweep == "shift" and self.synth is None:
                raise ValueError("shift sweeps need a synthetic data source")
            if self.sweep == "size" and self.synth is not None:
                smallest = min(int(v) for v in self.sweep_values)
                if smallest < self.synth.class_count:
                    raise ValueError(
                        f"calibration sizes must be >= {self.synth.class_count} "
                        f"(the class count), got {smallest}"
                    )
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not 0.0 < self.calibration_fraction < 1.0:
            raise ValueError("calibration_fraction must be in (0, 1)")

    def to_dict(self) -> dict:
        synth = None
        if self.synth is not None:
            synth = {
                "class_count": self.synth.class_count,
                "sample_count": self.synth.sample_count,
                "logit_scale": self.synth.logit_scale,
                "miscalibration": self.synth.miscalibration,
                "seed": self.synth.seed,
                "priors": None if self.synth.priors is None
                else list(self.synth.priors.priors),
            }
        priors = self.priors
        if not isinstance(priors, str):
            priors = list(np.asarray(priors, dtype=float))
        return {
            "method": self.method,
            "synth": synth,
            "calibration_path": self.calibration_path,
            "test_path": self.test_path,
            "priors": priors,
            "sweep": self.sweep,
            "sweep_values": list(self.sweep_values),
            "seed": self.seed,
            "repetitions": self.repetitions,
            "calibration_fraction": self.calibration_fraction,
            "bin_count": self.bin_count,
            "shift_target_scale": self.shift_target_scale,
            "scalar_search": vars(self.scalar_search).copy(),
            "gradient_descent": vars(self.gradient_descent).copy(),
        }


@dataclass
class Report:
    """Aggregated experiment output.

    ``wall_time_s`` is measured per run and deliberately excluded from
    ``to_dict`` (and hence from saved JSON) so that identical configs
    produce byte-identical report files.
    """

    config_echo: dict
    conditions: list
    toolkit_version: str
    wall_time_s: float

    def to_dict(self) -> dict:
        return {
            "config": self.config_echo,
            "toolkit_version": self.toolkit_version,
            "conditions": self.conditions,
        }


def _resolve_priors(cfg: ExperimentConfig, base: LogitDataset) -> ClassPriors:
    if isinstance(cfg.priors, str):
        if cfg.priors == "uniform":
            return ClassPriors.uniform(base.class_count)
        if cfg.priors == "empirical":
            return ClassPriors.from_labels(base)
        raise ValueError(f"unknown priors mode {cfg.priors!r}")
    return ClassPriors(np.asarray(cfg.priors, dtype=np.float64))


def fit_method(cfg: ExperimentConfig, calib: LogitDataset, priors: ClassPriors):
    """Fit one method on a calibration set.

    Returns the fit-record dict and a callable mapping a test dataset to
    its calibrated ProbabilityMatrix.
    """
    if cfg.method == "ts":
        fit = fit_temperature(calib, cfg.scalar_search)
        return _temp_record(fit), lambda ds: apply_ts(ds, fit)
    if cfg.method == "uts":
        fit = fit_uts(calib, priors, cfg.scalar_search)
        return _temp_record(fit), lambda ds: apply_ts(ds, fit)
    if cfg.method == "ats":
        fit = fit_ats(calib, "default", cfg.scalar_search)
        return _temp_record(fit), lambda ds: apply_ts(ds, fit)
    fit = fit_affine(calib, cfg.method, cfg.gradient_descent)
    record = {"temperature": None, "scale_factor": None,
              "final_loss": fit.final_loss, "converged": fit.converged}
    return record, lambda ds: apply_affine(ds, fit)


def _temp_record(fit) -> dict:
    return {"temperature": fit.temperature, "scale_factor": fit.scale_factor,
            "final_loss": fit.final_loss, "converged": fit.converged}


def _metrics_dict(report: MetricsReport) -> dict:
    return report.to_dict()


def _run_one(cfg: ExperimentConfig, base: LogitDataset, priors: ClassPriors,
             fixed_test: LogitDataset | None, rep: int, condition_index: int,
             condition):
    split_seed = _derive_seed(cfg.seed, rep, _PURPOSE_SPLIT)
    ds = base
    if cfg.sweep == "shift":
        ds = shift_domain(
            cfg.synth, condition,
            cfg.shift_target_scale or cfg.synth.miscalibration,
            seed=_derive_seed(cfg.seed, rep, _PURPOSE_DATASET),
        ).observed
    if fixed_test is not None:
        calib, test = base, fixed_test
    else:
        part = split(ds, cfg.calibration_fraction, split_seed)
        calib, test = take(ds, part.calibration_indices), take(ds, part.test_indices)

    cond_seed = _derive_seed(cfg.seed, rep, _PURPOSE_CONDITION, condition_index)
    if cfg.sweep == "noise":
        calib = flip_labels(calib, condition, cond_seed)
    elif cfg.sweep == "size":
        size = int(condition)
        if size > calib.sample_count:
            raise ValueError(f"calibration size {size} exceeds available "
                             f"{calib.sample_count}")
        rng = np.random.default_rng(np.random.SeedSequence(cond_seed))
        keep = np.sort(rng.choice(calib.sample_count, size=size, replace=False))
        calib = take(calib, keep)

    fit_record, apply_fn = fit_method(cfg, calib, priors)
    calibrated = evaluate(apply_fn(test), test.labels, cfg.bin_count)
    uncalibrated = evaluate(tempered_softmax(test.logits, 1.0), test.labels,
                            cfg.bin_count)
    return {
        "fit": fit_record,
        "test": _metrics_dict(calibrated),
        "uncalibrated": _metrics_dict(uncalibrated),
    }


_AGGREGATED = ("nll_mean", "ece", "brier_mean", "accuracy")


def _aggregate(records: list) -> dict:
    out = {}
    for side in ("test", "uncalibrated"):
        out[side] = {}
        for metric in _AGGREGATED:
            values = np.array([r[side][metric] for r in records])
            std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
            out[side][metric] = {"mean": float(values.mean()), "std": std}
    return out


def run_experiment(cfg: ExperimentConfig) -> Report:
    started = time.perf_counter()
    if cfg.synth is not None:
        base = generate(cfg.synth).observed
    else:
        base = load_dataset(cfg.calibration_path)
    fixed_test = load_dataset(cfg.test_path) if cfg.test_path is not None else None
    priors = _resolve_priors(cfg, base)
    conditions = list(cfg.sweep_values) if cfg.sweep else [None]

    threads = max(1, int(os.environ.get("TEMPCAL_THREADS", "1")))
    condition_records = []
    for j, condition in enumerate(conditions):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                records = list(pool.map(
                    lambda rep: _run_one(cfg, base, priors, fixed_test, rep, j,
                                         condition),
                    range(cfg.repetitions),
                ))
        else:
            records = [_run_one(cfg, base, priors, fixed_test, rep, j, condition)
                       for rep in range(cfg.repetitions)]
        condition_records.append({
            "condition": condition,
            "repetitions": records,
            "summary": _aggregate(records),
        })
    return Report(
        config_echo=cfg.to_dict(),
        conditions=condition_records,
        toolkit_version=__version__,
        wall_time_s=time.perf_counter() - started,
    )
