"""Bagged ensemble of randomized threshold trees.

Each member trains on a random 80% of the embedded rows (sampled without
replacement) with its own stopping hyperparameters drawn from configured
ranges, and always stops on both criteria. At forecast time every tree
runs its own recursive forecast, propagating its own predictions through
its own lag updates; the ensemble output is the arithmetic mean taken at
the end. A flag switches to averaging each step and feeding the mean
back, for comparison.

Member seeds derive from the forest seed by the documented 64-bit mix,
and members merge in index order, so results are identical whatever the
thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .data import (
    EmbeddedMatrix,
    ForecastMatrix,
    SeriesCollection,
    create_test_set,
    encode_future_covariate_block,
    update_test_set,
)
from .errors import SetarError
from .rng import Rng
from .split import DEFAULT_GRID_SIZE
from .stopping import StoppingConfig
from .tree import SetarTree, predict_rows, train_tree

RANDOMIZATIONS = ("significance", "error_red", "both")


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 10
    bagging_fraction: float = 0.8
    feature_fraction: float = 1.0
    seed: int = 1
    randomization: str = "both"
    alpha0_range: tuple = (0.01, 0.1)
    divider_range: tuple = (1.5, 5.0)
    error_threshold_range: tuple = (0.01, 0.05)
    base: StoppingConfig = StoppingConfig()
    grid_size: int = DEFAULT_GRID_SIZE
    stepwise_averaging: bool = False

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("a forest needs at least one tree")
        if not 0.0 < self.bagging_fraction <= 1.0:
            raise ValueError("bagging fraction must lie in (0, 1]")
        if not 0.0 < self.feature_fraction <= 1.0:
            raise ValueError("feature fraction must lie in (0, 1]")
        if self.randomization not in RANDOMIZATIONS:
            raise ValueError(
                f"randomization must be one of {RANDOMIZATIONS}, got {self.randomization!r}"
            )


@dataclass(frozen=True)
class ForestMember:
    tree: SetarTree
    row_sample: np.ndarray
    feature_sample: np.ndarray
    stopping: StoppingConfig


@dataclass(frozen=True)
class SetarForest:
    members: tuple
    config: ForestConfig
    n_lags: int
    column_names: tuple
    covariate_specs: tuple

    @property
    def trees(self):
        return tuple(m.tree for m in self.members)


def _member_stopping(config: ForestConfig, rng: Rng) -> StoppingConfig:
    """Draw a member's stopping hyperparameters per the randomization mode.

    Draw order is fixed (alpha0, divider, error threshold) so streams
    stay aligned across modes that share draws.
    """
    base = config.base
    alpha0, divider, err = base.alpha0, base.significance_divider, base.error_threshold
    if config.randomization in ("significance", "both"):
        alpha0 = rng.uniform_range(*config.alpha0_range)
        divider = rng.uniform_range(*config.divider_range)
    if config.randomization in ("error_red", "both"):
        err = rng.uniform_range(*config.error_threshold_range)
    return replace(
        base,
        criterion="both",
        alpha0=alpha0,
        significance_divider=divider,
        error_threshold=err,
    )


def _train_member(matrix: EmbeddedMatrix, config: ForestConfig, index: int,
                  covariate_specs) -> ForestMember:
    rng = Rng(config.seed).substream(index)
    stopping = _member_stopping(config, rng)
    n_rows = matrix.n_rows
    n_cols = matrix.n_predictors
    bag_size = math.ceil(config.bagging_fraction * n_rows)
    row_sample = rng.sample_indices(n_rows, bag_size)
    if config.feature_fraction < 1.0:
        keep = max(1, math.ceil(config.feature_fraction * n_cols))
        feature_sample = rng.sample_indices(n_cols, keep)
    else:
        feature_sample = np.arange(n_cols, dtype=np.int64)
    sub = matrix.take(row_sample)
    if feature_sample.shape[0] != n_cols:
        sub = sub.select_columns(feature_sample)
    tree = train_tree(sub, stopping, grid_size=config.grid_size,
                      covariate_specs=covariate_specs)
    return ForestMember(
        tree=tree, row_sample=row_sample, feature_sample=feature_sample,
        stopping=stopping,
    )


def train_forest(
    matrix: EmbeddedMatrix,
    config: ForestConfig | None = None,
    covariate_specs=(),
    threads: int = 1,
) -> SetarForest:
    """Train all members; a member failure aborts with its index."""
    config = config or ForestConfig()

    def build(i):
        try:
            return _train_member(matrix, config, i, covariate_specs)
        except SetarError as exc:
            raise type(exc)(f"tree {i}: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            members = tuple(pool.map(build, range(config.n_trees)))
    else:
        members = tuple(build(i) for i in range(config.n_trees))
    return SetarForest(
        members=members,
        config=config,
        n_lags=matrix.n_lags,
        column_names=matrix.column_names,
        covariate_specs=tuple(covariate_specs),
    )


def _forecast_member(
    member: ForestMember,
    collection: SeriesCollection,
    horizon: int,
    specs,
    future_covariates,
    n_lags: int,
) -> np.ndarray:
    """One member's recursive forecast, projected onto its feature subset."""
    test = create_test_set(collection, n_lags, specs, future_covariates)
    feats = member.feature_sample
    full = feats.shape[0] == test.n_predictors
    values = np.empty((len(collection), horizon))
    for step in range(horizon):
        rows = test.predictors if full else test.predictors[:, feats]
        step_pred = predict_rows(member.tree.root, rows)
        values[:, step] = step_pred
        if step + 1 < horizon:
            block = None
            if specs:
                block = encode_future_covariate_block(
                    collection, specs, future_covariates, step + 1
                )
            test = update_test_set(test, step_pred, block, step=step + 1)
    return values


def forecast_forest(
    forest: SetarForest,
    collection: SeriesCollection,
    horizon: int,
    future_covariates=None,
    threads: int = 1,
    return_member_forecasts: bool = False,
):
    """Mean of the member forecasts, per series per step."""
    specs = forest.covariate_specs
    if forest.config.stepwise_averaging:
        stacked = _forecast_stepwise(forest, collection, horizon, future_covariates)
    else:
        def run(member):
            return _forecast_member(
                member, collection, horizon, specs, future_covariates, forest.n_lags
            )

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                per_tree = list(pool.map(run, forest.members))
        else:
            per_tree = [run(m) for m in forest.members]
        stacked = np.stack(per_tree)
    mean = stacked.sum(axis=0) / stacked.shape[0]
    result = ForecastMatrix(series_ids=collection.ids, values=mean)
    if return_member_forecasts:
        members = [
            ForecastMatrix(series_ids=collection.ids, values=stacked[i].copy())
            for i in range(stacked.shape[0])
        ]
        return result, members
    return result


def _forecast_stepwise(forest, collection, horizon, future_covariates) -> np.ndarray:
    """Comparison mode: average each step and feed the mean back to all trees."""
    specs = forest.covariate_specs
    test = create_test_set(collection, forest.n_lags, specs, future_covariates)
    stacked = np.empty((len(forest.members), len(collection), horizon))
    for step in range(horizon):
        for mi, member in enumerate(forest.members):
            feats = member.feature_sample
            rows = (
                test.predictors
                if feats.shape[0] == test.n_predictors
                else test.predictors[:, feats]
            )
            stacked[mi, :, step] = predict_rows(member.tree.root, rows)
        if step + 1 < horizon:
            mean_step = stacked[:, :, step].sum(axis=0) / stacked.shape[0]
            block = None
            if specs:
                block = encode_future_covariate_block(
                    collection, specs, future_covariates, step + 1
                )
            test = update_test_set(test, mean_step, block, step=step + 1)
    return stacked
