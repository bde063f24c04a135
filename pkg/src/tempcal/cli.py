"""Command-line interface: synth, calibrate, evaluate, sweep.

Errors print a machine-readable JSON object on stderr and exit nonzero.
Thread count for sweep repetitions comes from the TEMPCAL_THREADS
environment variable; everything else is a flag.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ats import fit_ats
from .experiment import ExperimentConfig, fit_method, run_experiment
from .io import load_dataset, report_to_json, save_dataset, save_report
from .metrics import evaluate
from .optimize import GradientDescentConfig, ScalarSearchConfig
from .scaling import tempered_softmax
from .synth import SyntheticSpec, generate
from .ts import apply as apply_temperature_fit
from .uts import ClassPriors


def _parse_priors(text: str, class_count: int) -> ClassPriors | None:
    if text == "uniform":
        return ClassPriors.uniform(class_count)
    if text == "empirical":
        return None  # resolved by the caller against labeled data
    values = np.asarray([float(v) for v in text.split(",")], dtype=np.float64)
    return ClassPriors(values)


def _add_search_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--search-lower", type=float, default=1e-3,
                        help="lower bound of the scalar search (default 1e-3)")
    parser.add_argument("--search-upper", type=float, default=1e3,
                        help="upper bound of the scalar search (default 1e3)")
    parser.add_argument("--search-tol", type=float, default=1e-6,
                        help="log-space bracket tolerance (default 1e-6)")
    parser.add_argument("--gd-lr", type=float, default=0.01,
                        help="gradient descent learning rate (default 0.01)")
    parser.add_argument("--gd-iterations", type=int, default=5000,
                        help="gradient descent iteration cap (default 5000)")
    parser.add_argument("--l2-penalty", type=float, default=0.0,
                        help="ridge penalty for affine fits (default 0)")


def _search_config(args) -> ScalarSearchConfig:
    return ScalarSearchConfig(lower=args.search_lower, upper=args.search_upper,
                              tolerance=args.search_tol)


def _gd_config(args) -> GradientDescentConfig:
    return GradientDescentConfig(learning_rate=args.gd_lr,
                                 max_iterations=args.gd_iterations,
                                 l2_penalty=args.l2_penalty)


def _cmd_synth(args) -> int:
    priors = None
    if args.priors != "uniform":
        priors = _parse_priors(args.priors, args.classes)
        if priors is None:
            raise ValueError("synth needs explicit or uniform priors")
    spec = SyntheticSpec(class_count=args.classes, sample_count=args.samples,
                         logit_scale=args.scale, miscalibration=args.miscalibration,
                         seed=args.seed, priors=priors)
    ds = generate(spec)
    save_dataset(ds.observed, args.out)
    sidecar = {
        "class_count": spec.class_count,
        "sample_count": spec.sample_count,
        "logit_scale": spec.logit_scale,
        "miscalibration": spec.miscalibration,
        "seed": spec.seed,
        "priors": list(spec.prior_vector()),
        "empirical_priors": list(ds.empirical_priors.priors),
    }
    sidecar_path = str(args.out) + ".json" if not str(args.out).endswith(".csv") \
        else str(args.out)[:-4] + ".json"
    save_report(sidecar, sidecar_path)
    print(f"wrote {args.out} and {sidecar_path}")
    return 0


def _cmd_calibrate(args) -> int:
    calib = load_dataset(args.calib)
    priors = _parse_priors(args.priors, calib.class_count)
    if priors is None:  # empirical
        priors = ClassPriors.from_labels(calib)
    if args.method == "ats" and args.assignment:
        sets = json.loads(Path(args.assignment).read_text())
        fit = fit_ats(calib, sets, _search_config(args))
        fit_record = {"temperature": fit.temperature, "scale_factor": None,
                      "final_loss": fit.final_loss, "converged": fit.converged}

        def apply_fn(ds):
            return apply_temperature_fit(ds, fit)
    else:
        cfg = ExperimentConfig(
            method=args.method,
            calibration_path=args.calib,
            priors=tuple(priors.priors) if args.method == "uts" else "uniform",
            seed=args.seed,
            repetitions=1,
            bin_count=args.bins,
            scalar_search=_search_config(args),
            gradient_descent=_gd_config(args),
        )
        fit_record, apply_fn = fit_method(cfg, calib, priors)
    payload = {"method": args.method, "fit": fit_record,
               "toolkit_version": __version__}
    if args.test:
        test = load_dataset(args.test)
        payload["test"] = evaluate(apply_fn(test), test.labels, args.bins).to_dict()
        payload["uncalibrated"] = evaluate(
            tempered_softmax(test.logits, 1.0), test.labels, args.bins).to_dict()
    if args.out:
        save_report(payload, args.out)
        print(f"wrote {args.out}")
    else:
        print(report_to_json(payload))
    return 0


def _cmd_evaluate(args) -> int:
    ds = load_dataset(args.data)
    if ds.labels is None:
        raise ValueError("evaluate needs a labeled dataset")
    probs = tempered_softmax(ds.logits, args.temperature)
    payload = {
        "temperature": args.temperature,
        "metrics": evaluate(probs, ds.labels, args.bins).to_dict(),
        "toolkit_version": __version__,
    }
    if args.out:
        save_report(payload, args.out)
        print(f"wrote {args.out}")
    else:
        print(report_to_json(payload))
    return 0


def _cmd_sweep(args) -> int:
    synth = None
    if args.classes is not None:
        priors = None
        if args.priors not in ("uniform", "empirical"):
            priors = _parse_priors(args.priors, args.classes)
        synth = SyntheticSpec(class_count=args.classes, sample_count=args.samples,
                              logit_scale=args.scale,
                              miscalibration=args.miscalibration,
                              seed=args.seed, priors=priors)
    values = tuple(float(v) for v in args.values.split(","))
    if args.sweep == "size":
        values = tuple(int(v) for v in values)
    cfg = ExperimentConfig(
        method=args.method,
        synth=synth,
        calibration_path=args.calib,
        test_path=args.test,
        priors=args.priors if args.priors in ("uniform", "empirical")
        else tuple(float(v) for v in args.priors.split(",")),
        sweep=args.sweep,
        sweep_values=values,
        seed=args.seed,
        repetitions=args.reps,
        calibration_fraction=args.calib_fraction,
        bin_count=args.bins,
        shift_target_scale=args.shift_target,
        scalar_search=_search_config(args),
        gradient_descent=_gd_config(args),
    )
    report = run_experiment(cfg)
    save_report(report, args.out)
    print(f"wrote {args.out} ({report.wall_time_s:.2f} s)", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tempcal",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic logit dataset")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--scale", type=float, default=2.0, help="true-logit std")
    p.add_argument("--miscalibration", type=float, default=1.0,
                   help="factor multiplying the true logits")
    p.add_argument("--priors", default="uniform",
                   help="'uniform' or comma-separated class frequencies")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(run=_cmd_synth)

    p = sub.add_parser("calibrate", help="fit one calibration method")
    p.add_argument("--method", choices=["ts", "uts", "vector", "matrix", "ats"],
                   required=True)
    p.add_argument("--calib", required=True, help="calibration dataset CSV")
    p.add_argument("--test", help="optional test dataset CSV to evaluate on")
    p.add_argument("--priors", default="uniform",
                   help="'uniform', 'empirical', or comma-separated frequencies")
    p.add_argument("--assignment",
                   help="ats only: JSON file of per-class member index lists")
    p.add_argument("--bins", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="report JSON path (stdout when omitted)")
    _add_search_flags(p)
    p.set_defaults(run=_cmd_calibrate)

    p = sub.add_parser("evaluate", help="metrics of tempered softmax vs labels")
    p.add_argument("--data", required=True, help="labeled dataset CSV")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--bins", type=int, default=15)
    p.add_argument("--out", help="report JSON path (stdout when omitted)")
    p.set_defaults(run=_cmd_evaluate)

    p = sub.add_parser("sweep", help="repeated experiment over a condition sweep")
    p.add_argument("--method", choices=["ts", "uts", "vector", "matrix", "ats"],
                   required=True)
    p.add_argument("--sweep", choices=["noise", "shift", "size"], required=True)
    p.add_argument("--values", required=True, help="comma-separated condition values")
    p.add_argument("--classes", type=int, help="synthetic source: class count")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--scale", type=float, default=2.0)
    p.add_argument("--miscalibration", type=float, default=2.5)
    p.add_argument("--shift-target", type=float, default=None,
                   help="target-domain miscalibration for shift sweeps")
    p.add_argument("--calib", help="file source: calibration CSV")
    p.add_argument("--test", help="file source: test CSV")
    p.add_argument("--priors", default="uniform")
    p.add_argument("--bins", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--calib-fraction", type=float, default=0.2)
    p.add_argument("--out", required=True)
    _add_search_flags(p)
    p.set_defaults(run=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except Exception as exc:  # surface a machine-readable error object
        print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
