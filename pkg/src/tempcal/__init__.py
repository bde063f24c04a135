"""Post-hoc confidence calibration for classifiers, driven by exported logits."""

__version__ = "0.1.0"

from .data import (
    LogitDataset,
    Partition,
    ProbabilityMatrix,
    TemperatureFit,
    drop_labels,
    split,
    take,
    validate_dataset,
)
from .scaling import (
    AffineParams,
    affine_transform,
    rescale_logits,
    tempered_softmax,
)
from .metrics import (
    MetricsReport,
    ReliabilityBins,
    accuracy,
    brier,
    ece,
    evaluate,
    nll,
    reliability_bins,
)
from .optimize import (
    GradientDescentConfig,
    GradientDescentResult,
    ScalarSearchConfig,
    ScalarSearchResult,
    minimize_gd,
    minimize_scalar,
)
from .ts import fit_temperature, stationarity_residual
from .uts import (
    ClassPriors,
    WeightMatrix,
    class_weights,
    fit_scale,
    fit_uts,
    weighted_nll,
)
from .affine import AffineFit, apply_affine, fit_affine
from .ats import AttendedAssignment, attended_loss, build_assignment, fit_ats
from .synth import SyntheticDataset, SyntheticSpec, flip_labels, generate, shift_domain
from .estimators import (
    AttendedTemperatureScaling,
    MatrixScaling,
    TemperatureScaling,
    UnsupervisedTemperatureScaling,
    VectorScaling,
)
from .experiment import ExperimentConfig, Report, run_experiment
from .io import load_dataset, load_report, save_dataset, save_report

__all__ = [
    "AffineFit",
    "AffineParams",
    "AttendedAssignment",
    "AttendedTemperatureScaling",
    "ClassPriors",
    "ExperimentConfig",
    "GradientDescentConfig",
    "GradientDescentResult",
    "LogitDataset",
    "MatrixScaling",
    "MetricsReport",
    "Partition",
    "ProbabilityMatrix",
    "ReliabilityBins",
    "Report",
    "ScalarSearchConfig",
    "ScalarSearchResult",
    "SyntheticDataset",
    "SyntheticSpec",
    "TemperatureFit",
    "TemperatureScaling",
    "UnsupervisedTemperatureScaling",
    "VectorScaling",
    "WeightMatrix",
    "accuracy",
    "affine_transform",
    "apply_affine",
    "attended_loss",
    "brier",
    "build_assignment",
    "class_weights",
    "drop_labels",
    "ece",
    "evaluate",
    "fit_affine",
    "fit_ats",
    "fit_scale",
    "fit_temperature",
    "fit_uts",
    "flip_labels",
    "generate",
    "load_dataset",
    "load_report",
    "minimize_gd",
    "minimize_scalar",
    "nll",
    "reliability_bins",
    "rescale_logits",
    "run_experiment",
    "save_dataset",
    "save_report",
    "shift_domain",
    "split",
    "stationarity_residual",
    "take",
    "tempered_softmax",
    "validate_dataset",
    "weighted_nll",
]
