"""Command line interface.

Subcommands: ``simulate``, ``train``, ``train-forest``, ``forecast``,
``evaluate`` and ``run`` (end to end: hold out the final horizon of each
series, train, forecast, evaluate, report). Every run writes outputs
atomically and can be reproduced from its report alone.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import io as sio
from .data import Series, SeriesCollection, build_covariate_specs, create_input_matrix
from .errors import SetarError, UsageError
from .forest import ForestConfig, SetarForest, forecast_forest, train_forest
from .metrics import evaluate, heuristic_lags
from .serialize import load_model, save_model
from .simulate import (
    ChaoticLogisticConfig,
    MackeyGlassConfig,
    Setar2Config,
    generate,
)
from .split import DEFAULT_GRID_SIZE
from .stopping import StoppingConfig
from .tree import SetarTree, forecast as tree_forecast, train_tree

_STOPPING_NAMES = {"lin-test": "lin_test", "error-red": "error_red", "both": "both"}
_RANDOMIZE_NAMES = {"significance": "significance", "error-red": "error_red", "both": "both"}
_KIND_NAMES = {
    "chaotic-logistic": "chaotic_logistic",
    "mackey-glass": "mackey_glass",
    "setar2": "setar2",
}


def _default_threads() -> int:
    env = os.environ.get("SETAR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"SETAR_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _add_stopping_flags(parser):
    parser.add_argument("--stopping", choices=sorted(_STOPPING_NAMES), default="both",
                        help="split acceptance criteria (default both)")
    parser.add_argument("--alpha0", type=float, default=0.05,
                        help="initial significance level of the linearity test")
    parser.add_argument("--sig-divider", type=float, default=2.0,
                        help="per-level divisor of the significance level")
    parser.add_argument("--error-threshold", type=float, default=0.03,
                        help="minimum relative SSE reduction to keep a split")
    parser.add_argument("--max-depth", type=int, default=1000)
    parser.add_argument("--grid-size", type=int, default=DEFAULT_GRID_SIZE,
                        help="thresholds tried per column")


def _add_forest_flags(parser):
    parser.add_argument("--trees", type=int, default=10)
    parser.add_argument("--bagging-fraction", type=float, default=0.8)
    parser.add_argument("--feature-fraction", type=float, default=1.0)
    parser.add_argument("--randomize", choices=sorted(_RANDOMIZE_NAMES), default="both")
    parser.add_argument("--alpha0-range", type=float, nargs=2, default=(0.01, 0.1),
                        metavar=("LO", "HI"))
    parser.add_argument("--divider-range", type=float, nargs=2, default=(1.5, 5.0),
                        metavar=("LO", "HI"))
    parser.add_argument("--error-threshold-range", type=float, nargs=2,
                        default=(0.01, 0.05), metavar=("LO", "HI"))
    parser.add_argument("--stepwise-averaging", action="store_true",
                        help="average each step and feed the mean back (comparison mode)")


def _stopping_from_args(args) -> StoppingConfig:
    return StoppingConfig(
        criterion=_STOPPING_NAMES[args.stopping],
        alpha0=args.alpha0,
        significance_divider=args.sig_divider,
        error_threshold=args.error_threshold,
        max_depth=args.max_depth,
    )


def _forest_config_from_args(args, seed: int) -> ForestConfig:
    return ForestConfig(
        n_trees=args.trees,
        bagging_fraction=args.bagging_fraction,
        feature_fraction=args.feature_fraction,
        seed=seed,
        randomization=_RANDOMIZE_NAMES[args.randomize],
        alpha0_range=tuple(args.alpha0_range),
        divider_range=tuple(args.divider_range),
        error_threshold_range=tuple(args.error_threshold_range),
        base=_stopping_from_args(args),
        grid_size=args.grid_size,
        stepwise_averaging=args.stepwise_averaging,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="setar",
        description="Global forecasting with threshold autoregressive trees and forests",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic dataset")
    p.add_argument("--kind", choices=sorted(_KIND_NAMES), required=True)
    p.add_argument("--n", type=int, default=100, help="number of series")
    p.add_argument("--length", type=int, default=600)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--noise-sd", type=float, default=None)
    p.add_argument("--logistic-r", type=float, default=4.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train a single tree")
    p.add_argument("--input", required=True)
    p.add_argument("--covariate-config")
    p.add_argument("--lag", type=int, required=True)
    p.add_argument("--horizon", type=int, default=None,
                   help="declared forecast horizon (recorded in the report)")
    _add_stopping_flags(p)
    p.add_argument("--model-out", required=True)
    p.add_argument("--report-out")

    p = sub.add_parser("train-forest", help="train a bagged ensemble of trees")
    p.add_argument("--input", required=True)
    p.add_argument("--covariate-config")
    p.add_argument("--lag", type=int, required=True)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--threads", type=int, default=None)
    _add_stopping_flags(p)
    _add_forest_flags(p)
    p.add_argument("--model-out", required=True)
    p.add_argument("--report-out")

    p = sub.add_parser("forecast", help="forecast with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--covariate-config")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--future-covariates")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="score forecasts against held-out actuals")
    p.add_argument("--forecasts", required=True)
    p.add_argument("--actuals", required=True)
    p.add_argument("--training", required=True)
    p.add_argument("--seasonality", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="hold out, train, forecast and evaluate in one go")
    p.add_argument("--input", required=True)
    p.add_argument("--covariate-config")
    p.add_argument("--lag", type=int, default=None,
                   help="lag count; defaults to the seasonality/horizon heuristic")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--seasonality", type=int, default=None,
                   help="seasonal cycle length for MASE and the lag heuristic (default 1)")
    p.add_argument("--model", choices=("tree", "forest"), default="tree")
    p.add_argument("--baseline", choices=("pr",), default=None,
                   help="train the pooled-regression baseline instead of a tree")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--threads", type=int, default=None)
    _add_stopping_flags(p)
    _add_forest_flags(p)
    p.add_argument("--forecasts-out", required=True)
    p.add_argument("--report-out")
    p.add_argument("--model-out")
    return parser


def _threads(args) -> int:
    value = getattr(args, "threads", None)
    if value is None:
        return _default_threads()
    if value < 1:
        raise UsageError("--threads must be >= 1")
    return value


def _load_input(args):
    collection = sio.read_collection(args.input, getattr(args, "covariate_config", None))
    specs = build_covariate_specs(collection)
    return collection, specs


def _model_summary(model) -> dict:
    if isinstance(model, SetarTree):
        s = model.training_summary
        return {
            "kind": "tree",
            "depth": s.depth,
            "leaves": s.n_leaves,
            "rows": s.n_rows,
            "rows_per_leaf": list(s.rows_per_leaf),
            "splits": [
                {"column": col, "threshold": thr} for col, thr in model.splits()
            ],
        }
    assert isinstance(model, SetarForest)
    return {
        "kind": "forest",
        "trees": [
            {
                "index": i,
                "rows": int(m.row_sample.shape[0]),
                "alpha0": m.stopping.alpha0,
                "significance_divider": m.stopping.significance_divider,
                "error_threshold": m.stopping.error_threshold,
                **{
                    k: v
                    for k, v in _model_summary(m.tree).items()
                    if k in ("depth", "leaves", "splits")
                },
            }
            for i, m in enumerate(forest_members(model))
        ],
    }


def forest_members(forest: SetarForest):
    return forest.members


def _write_report(path, payload):
    sio.atomic_write(path, json.dumps(payload, indent=2) + "\n")


def _cmd_simulate(args) -> int:
    kind = _KIND_NAMES[args.kind]
    if kind == "chaotic_logistic":
        kwargs = dict(n_series=args.n, length=args.length, seed=args.seed,
                      r=args.logistic_r)
        if args.noise_sd is not None:
            kwargs["noise_sd"] = args.noise_sd
        config = ChaoticLogisticConfig(**kwargs)
    elif kind == "mackey_glass":
        config = MackeyGlassConfig(n_series=args.n, length=args.length, seed=args.seed)
    else:
        kwargs = dict(n_series=args.n, length=args.length, seed=args.seed)
        if args.noise_sd is not None:
            kwargs["noise_sd"] = args.noise_sd
        config = Setar2Config(**kwargs)
    collection = generate(config)
    sio.write_collection(collection, args.out)
    print(f"wrote {len(collection)} series of length {args.length} to {args.out}")
    return 0


def _cmd_train(args) -> int:
    started = time.perf_counter()
    collection, specs = _load_input(args)
    matrix = create_input_matrix(collection, args.lag, specs)
    config = _stopping_from_args(args)
    model = train_tree(matrix, config, grid_size=args.grid_size, covariate_specs=specs)
    train_ms = (time.perf_counter() - started) * 1000.0
    save_model(model, args.model_out)
    summary = _model_summary(model)
    print(
        f"trained tree: depth {summary['depth']}, {summary['leaves']} leaves "
        f"on {matrix.n_rows} rows ({train_ms:.0f} ms) -> {args.model_out}"
    )
    if args.report_out:
        _write_report(args.report_out, {
            "command": "train",
            "config": _config_echo(args),
            "timing_ms": {"train": train_ms},
            "model": summary,
        })
    return 0


def _cmd_train_forest(args) -> int:
    started = time.perf_counter()
    collection, specs = _load_input(args)
    matrix = create_input_matrix(collection, args.lag, specs)
    config = _forest_config_from_args(args, args.seed)
    model = train_forest(matrix, config, covariate_specs=specs, threads=_threads(args))
    train_ms = (time.perf_counter() - started) * 1000.0
    save_model(model, args.model_out)
    print(
        f"trained forest of {config.n_trees} trees on {matrix.n_rows} rows "
        f"({train_ms:.0f} ms) -> {args.model_out}"
    )
    if args.report_out:
        _write_report(args.report_out, {
            "command": "train-forest",
            "config": _config_echo(args),
            "timing_ms": {"train": train_ms},
            "model": _model_summary(model),
        })
    return 0


def _cmd_forecast(args) -> int:
    model = load_model(args.model)
    collection, _ = _load_input(args)
    future = (
        sio.read_future_covariates(args.future_covariates)
        if args.future_covariates
        else None
    )
    started = time.perf_counter()
    if isinstance(model, SetarForest):
        result = forecast_forest(model, collection, args.horizon, future,
                                 threads=_threads(args))
    else:
        result = tree_forecast(model, collection, args.horizon, future)
    forecast_ms = (time.perf_counter() - started) * 1000.0
    sio.write_forecasts(result, args.out)
    print(f"forecast {len(collection)} series x {args.horizon} steps "
          f"({forecast_ms:.0f} ms) -> {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    forecasts = sio.read_forecasts(args.forecasts)
    actuals = sio.read_step_table(args.actuals)
    training = {s.id: s.values for s in sio.read_collection(args.training)}
    report = evaluate(forecasts, actuals, training, args.seasonality)
    _write_report(args.out, report.as_dict())
    agg = report.as_dict()["aggregates"]
    print(
        "mean msMAPE {mean_msmape:.4f}  median msMAPE {median_msmape:.4f}  "
        "mean MASE {mean_mase}  median MASE {median_mase}".format(**agg)
    )
    return 0


def _split_holdout(collection: SeriesCollection, horizon: int):
    """Hold out the final ``horizon`` points of each series."""
    train_series, actuals, future = [], {}, {}
    for s in collection:
        if len(s) <= horizon:
            raise UsageError(
                f"series {s.id!r} has {len(s)} points, too short to hold out {horizon}"
            )
        head = {name: seq[: len(s) - horizon] for name, seq in s.covariates.items()}
        train_series.append(Series(id=s.id, values=s.values[: len(s) - horizon].copy(),
                                   covariates=head))
        actuals[s.id] = s.values[len(s) - horizon :]
        future[s.id] = {
            name: list(seq[len(s) - horizon :]) for name, seq in s.covariates.items()
        }
    train = SeriesCollection(
        series=tuple(train_series),
        covariate_kinds=dict(collection.covariate_kinds),
        frequency_hint=collection.frequency_hint,
    )
    return train, actuals, future


def _cmd_run(args) -> int:
    collection, _ = _load_input(args)
    seasonality = args.seasonality if args.seasonality is not None else 1
    lag = args.lag
    if lag is None:
        lag = heuristic_lags(args.seasonality, args.horizon)
    train_coll, actuals, future = _split_holdout(collection, args.horizon)
    specs = build_covariate_specs(train_coll)
    matrix = create_input_matrix(train_coll, lag, specs)
    future_arg = future if specs else None

    timing = {}
    started = time.perf_counter()
    if args.baseline == "pr":
        stopping = _stopping_from_args(args)
        model = train_tree(
            matrix,
            StoppingConfig(
                criterion=stopping.criterion,
                alpha0=stopping.alpha0,
                significance_divider=stopping.significance_divider,
                error_threshold=stopping.error_threshold,
                max_depth=0,
            ),
            grid_size=args.grid_size,
            covariate_specs=specs,
        )
    elif args.model == "forest":
        model = train_forest(
            matrix, _forest_config_from_args(args, args.seed),
            covariate_specs=specs, threads=_threads(args),
        )
    else:
        model = train_tree(matrix, _stopping_from_args(args),
                           grid_size=args.grid_size, covariate_specs=specs)
    timing["train"] = (time.perf_counter() - started) * 1000.0

    started = time.perf_counter()
    if isinstance(model, SetarForest):
        result = forecast_forest(model, train_coll, args.horizon, future_arg,
                                 threads=_threads(args))
    else:
        result = tree_forecast(model, train_coll, args.horizon, future_arg)
    timing["forecast"] = (time.perf_counter() - started) * 1000.0

    started = time.perf_counter()
    training_values = {s.id: s.values for s in train_coll}
    report = evaluate(result, actuals, training_values, seasonality)
    timing["evaluate"] = (time.perf_counter() - started) * 1000.0

    sio.write_forecasts(result, args.forecasts_out)
    if args.model_out:
        save_model(model, args.model_out)
    payload = {
        "command": "run",
        "config": _config_echo(args, lag=lag, seasonality=seasonality),
        "timing_ms": timing,
        "model": _model_summary(model),
        "metrics": report.as_dict()["aggregates"],
        "mase_undefined": list(report.mase_undefined),
        "outputs": {"forecasts": args.forecasts_out, "model": args.model_out},
    }
    if args.report_out:
        _write_report(args.report_out, payload)
    agg = payload["metrics"]
    print(
        "mean msMAPE {mean_msmape:.4f}  median msMAPE {median_msmape:.4f}  "
        "mean MASE {mean_mase}  median MASE {median_mase}".format(**agg)
    )
    print(
        "timing ms: train {train:.0f}  forecast {forecast:.0f}  evaluate {evaluate:.0f}"
        .format(**timing)
    )
    return 0


def _config_echo(args, **extra) -> dict:
    echo = {
        key: (list(value) if isinstance(value, tuple) else value)
        for key, value in sorted(vars(args).items())
        if key != "command" and value is not None
    }
    echo.update(extra)
    echo["command"] = args.command
    return echo


_COMMANDS = {
    "simulate": _cmd_simulate,
    "train": _cmd_train,
    "train-forest": _cmd_train_forest,
    "forecast": _cmd_forecast,
    "evaluate": _cmd_evaluate,
    "run": _cmd_run,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SetarError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
