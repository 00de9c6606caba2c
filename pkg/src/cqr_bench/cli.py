"""Command line entry point: ``cqr-bench run ...``"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import bench, synthetic
from .core import MethodTag
from .regressors import QuantileRegressorSpec, RegressorKind

_METHOD_BY_NAME = {m.value: m for m in MethodTag}
_REGRESSOR_BY_NAME = {k.value: k for k in RegressorKind}


def _parse_methods(text: str) -> tuple[MethodTag, ...]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise argparse.ArgumentTypeError("at least one method is required")
    methods = []
    for name in names:
        if name not in _METHOD_BY_NAME:
            raise argparse.ArgumentTypeError(
                f"unknown method {name!r} (choose from {', '.join(_METHOD_BY_NAME)})"
            )
        methods.append(_METHOD_BY_NAME[name])
    return tuple(methods)


def _parse_tune(text: str) -> tuple[bool, float | None]:
    if text == "off":
        return False, None
    if text.startswith("target="):
        try:
            return True, float(text.split("=", 1)[1])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad tuning target in {text!r}") from None
    raise argparse.ArgumentTypeError("--tune expects 'off' or 'target=<value>'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cqr-bench",
        description="Benchmark split-conformal quantile regression methods.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a coverage/width experiment")
    run.add_argument("--source", choices=["synthetic", "csv"], required=True)
    run.add_argument("--csv-path", help="input CSV (csv source)")
    run.add_argument("--target", help="target column name or index (csv source)")
    run.add_argument("--n", type=int, default=1000, help="synthetic sample size")
    run.add_argument(
        "--regressor", choices=sorted(_REGRESSOR_BY_NAME), default="qrf"
    )
    run.add_argument(
        "--methods",
        type=_parse_methods,
        default=tuple(MethodTag),
        help="comma-separated subset of cqr,cqr-m,cqr-r (default: all)",
    )
    run.add_argument("--alpha", type=float, default=0.1)
    run.add_argument(
        "--gamma",
        type=float,
        action="append",
        dest="gammas",
        help="training fraction; repeat the flag for a sweep (default 0.75)",
    )
    run.add_argument("--reps", type=int, default=10)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--eps", type=float, default=bench.DEFAULT_EPS)
    run.add_argument(
        "--tune",
        type=_parse_tune,
        default=(False, None),
        help="'off' or 'target=<coverage>' for nominal-level tuning",
    )
    run.add_argument("--tune-folds", type=int, default=5)
    run.add_argument(
        "--standardize",
        choices=["auto", "on", "off"],
        default="auto",
        help="divide responses by the training mean |y| (auto: csv only)",
    )
    run.add_argument("--test-fraction", type=float, default=0.2)
    run.add_argument("--trees", type=int, help="QRF tree count (default 100)")
    run.add_argument("--knn-k", type=int, help="KNN neighbor count (default ceil(sqrt(n)))")
    run.add_argument("--format", choices=["json", "csv"], default="json")
    run.add_argument("--out", required=True, help="output file path")
    return parser


def _config_from_args(args: argparse.Namespace) -> bench.ExperimentConfig:
    if args.source == "csv":
        if not args.csv_path or args.target is None:
            raise ValueError("csv source requires --csv-path and --target")
        target: str | int = args.target
        if isinstance(target, str) and target.lstrip("-").isdigit():
            target = int(target)
        source: bench.SyntheticSource | bench.CsvSource = bench.CsvSource(
            path=args.csv_path, target=target
        )
    else:
        source = bench.SyntheticSource(
            cfg=synthetic.SyntheticConfig(seed=args.seed), n=args.n
        )
    kind = _REGRESSOR_BY_NAME[args.regressor]
    hyper: dict[str, object] = {}
    if kind is RegressorKind.QRF and args.trees is not None:
        hyper["n_trees"] = args.trees
    if kind is RegressorKind.KNN and args.knn_k is not None:
        hyper["k"] = args.knn_k
    tune_enabled, tune_target = args.tune
    standardize = {"auto": None, "on": True, "off": False}[args.standardize]
    return bench.ExperimentConfig(
        source=source,
        regressor=QuantileRegressorSpec(kind=kind, hyperparameters=hyper, seed=args.seed),
        methods=args.methods,
        alpha=args.alpha,
        gammas=tuple(args.gammas) if args.gammas else (0.75,),
        repetitions=args.reps,
        seed=args.seed,
        eps=args.eps,
        tune=tune_enabled,
        tune_target=tune_target,
        tune_folds=args.tune_folds,
        test_fraction=args.test_fraction,
        standardize=standardize,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        result = bench.run_experiment(cfg)
        out = bench.emit(result, args.format, args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for agg in result.aggregates:
        width = "inf-only" if agg.width_mean is None else f"{agg.width_mean:.4f}"
        print(
            f"{agg.method:6s} gamma={agg.gamma:<5.3g} "
            f"coverage={agg.coverage_mean:.4f} (sd {agg.coverage_std:.4f}) "
            f"width={width}"
        )
    flagged = [r for r in result.records if r.n_infinite > 0]
    if flagged:
        print(
            f"warning: {len(flagged)} repetition(s) produced infinite intervals "
            "(calibration set too small for the requested level)",
            file=sys.stderr,
        )
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
