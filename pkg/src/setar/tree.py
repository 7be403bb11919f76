"""Threshold autoregressive regression tree with pooled-regression leaves.

Training grows the tree level by level. Every frontier node searches for
its best (column, threshold) split; the split is kept only if the
stopping criteria accept it at the level's significance, otherwise the
node freezes into a leaf. Growth ends when a level produces no splits or
the depth cap is hit. Each leaf carries a linear model fitted on exactly
the rows routed to it, so a tree whose root never splits is precisely
the pooled-regression baseline.

Forecasting is recursive: each step predicts one value per series from
its current lag window, then the windows shift with the new predictions
inserted as the most recent lag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import (
    EmbeddedMatrix,
    ForecastMatrix,
    SeriesCollection,
    create_test_set,
    encode_future_covariate_block,
    update_test_set,
)
from .errors import DimensionMismatch, EmptyTrainingSet, SingularSystem
from .linalg import LinearFit, fit_from_inner_products, inner_products_from_rows
from .split import (
    DEFAULT_GRID_SIZE,
    SplitDecision,
    min_child_size,
    scan_for_split,
    split_node,
)
from .stopping import StoppingConfig, is_good_split


@dataclass(frozen=True)
class LeafModel:
    fit: LinearFit
    n_train_rows: int

    def predict(self, predictors: np.ndarray):
        return self.fit.predict(predictors)


@dataclass(frozen=True)
class Leaf:
    model: LeafModel


@dataclass(frozen=True)
class Internal:
    decision: SplitDecision
    left: "Leaf | Internal"
    right: "Leaf | Internal"


@dataclass(frozen=True)
class TrainingSummary:
    depth: int
    n_leaves: int
    rows_per_leaf: tuple
    n_rows: int


@dataclass(frozen=True)
class SetarTree:
    root: "Leaf | Internal"
    config: StoppingConfig
    n_lags: int
    column_names: tuple
    covariate_specs: tuple
    grid_size: int
    training_summary: TrainingSummary

    @property
    def n_predictors(self) -> int:
        return len(self.column_names)

    def leaves(self):
        """Leaves in depth-first left-to-right order."""
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                out.append(node)
            else:
                stack.append(node.right)
                stack.append(node.left)
        return out

    def splits(self):
        """(column name, threshold) of every internal node, depth-first."""
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Internal):
                out.append((self.column_names[node.decision.column_index],
                            node.decision.threshold))
                stack.append(node.right)
                stack.append(node.left)
        return out


class _BuildNode:
    __slots__ = ("rows", "ip", "fit", "decision", "left", "right")

    def __init__(self, rows, ip, fit):
        self.rows = rows
        self.ip = ip
        self.fit = fit
        self.decision = None
        self.left = None
        self.right = None


def train_pr_model(matrix: EmbeddedMatrix) -> LeafModel:
    """Single pooled linear autoregression over every row.

    Serves both as the standalone baseline and as the leaf fitting
    primitive; rank deficiency falls back to the minimum-norm solution
    so prediction never fails.
    """
    if matrix.n_rows == 0:
        raise EmptyTrainingSet("cannot fit a pooled regression on zero rows")
    fit = fit_from_inner_products(
        inner_products_from_rows(matrix.predictors, matrix.targets), allow_singular=True
    )
    return LeafModel(fit=fit, n_train_rows=matrix.n_rows)


def train_tree(
    matrix: EmbeddedMatrix,
    config: StoppingConfig | None = None,
    grid_size: int = DEFAULT_GRID_SIZE,
    covariate_specs=(),
) -> SetarTree:
    """Grow a tree on the embedded matrix under the stopping rules."""
    config = config or StoppingConfig()
    n, p = matrix.predictors.shape
    if n == 0:
        raise EmptyTrainingSet("embedded matrix has no rows")
    predictors = np.ascontiguousarray(matrix.predictors, dtype=np.float64)
    targets = np.ascontiguousarray(matrix.targets, dtype=np.float64)
    aug = np.ascontiguousarray(np.hstack([np.ones((n, 1)), predictors]))
    candidates = np.arange(p, dtype=np.int64)
    min_child = min_child_size(p)

    root_ip = inner_products_from_rows(predictors, targets)
    root_fit = fit_from_inner_products(root_ip, allow_singular=True)
    root = _BuildNode(np.arange(n, dtype=np.int64), root_ip, root_fit)

    frontier = [root]
    depth_reached = 0
    for level in range(config.max_depth):
        next_frontier = []
        for node in frontier:
            if node.rows.shape[0] < 2 * min_child:
                continue  # frozen: too small to test
            found = scan_for_split(
                aug[node.rows], targets[node.rows], node.ip, candidates, grid_size,
                min_child,
            )
            if found is None:
                continue
            decision, left_ip = found
            right_ip = node.ip - left_ip
            try:
                left_fit = fit_from_inner_products(left_ip)
                right_fit = fit_from_inner_products(right_ip)
            except SingularSystem:
                continue
            if not is_good_split(node.fit, (left_fit, right_fit), config, level):
                continue
            left_local, right_local = split_node(predictors[node.rows], decision)
            assert left_local.shape[0] == decision.left_count
            node.decision = decision
            node.left = _BuildNode(node.rows[left_local], left_ip, left_fit)
            node.right = _BuildNode(node.rows[right_local], right_ip, right_fit)
            next_frontier.extend((node.left, node.right))
        if not next_frontier:
            break
        frontier = next_frontier
        depth_reached = level + 1

    rows_per_leaf = []

    def _freeze(node):
        if node.decision is None:
            model = LeafModel(fit=node.fit, n_train_rows=node.rows.shape[0])
            rows_per_leaf.append(node.rows.shape[0])
            return Leaf(model=model)
        return Internal(
            decision=node.decision, left=_freeze(node.left), right=_freeze(node.right)
        )

    frozen_root = _freeze(root)
    summary = TrainingSummary(
        depth=depth_reached,
        n_leaves=len(rows_per_leaf),
        rows_per_leaf=tuple(rows_per_leaf),
        n_rows=n,
    )
    return SetarTree(
        root=frozen_root,
        config=config,
        n_lags=matrix.n_lags,
        column_names=matrix.column_names,
        covariate_specs=tuple(covariate_specs),
        grid_size=grid_size,
        training_summary=summary,
    )


def find_leaf(tree: SetarTree, instance: np.ndarray) -> LeafModel:
    """Route one predictor vector to its leaf model."""
    instance = np.asarray(instance, dtype=np.float64)
    if instance.shape != (tree.n_predictors,):
        raise DimensionMismatch(
            f"instance has {instance.shape} predictors, tree expects {tree.n_predictors}"
        )
    node = tree.root
    while isinstance(node, Internal):
        if instance[node.decision.column_index] < node.decision.threshold:
            node = node.left
        else:
            node = node.right
    return node.model


def predict_leaf(model: LeafModel, instance: np.ndarray) -> float:
    """Intercept plus dot product; total on any finite input."""
    instance = np.asarray(instance, dtype=np.float64)
    if instance.shape != (model.fit.n_params - 1,):
        raise DimensionMismatch(
            f"instance has {instance.shape} predictors, leaf expects {model.fit.n_params - 1}"
        )
    return float(model.fit.beta[0] + instance @ model.fit.beta[1:])


def predict_rows(root, predictors: np.ndarray) -> np.ndarray:
    """Route and predict a batch of rows."""
    n = predictors.shape[0]
    out = np.empty(n)
    stack = [(root, np.arange(n))]
    while stack:
        node, idx = stack.pop()
        if idx.shape[0] == 0:
            continue
        if isinstance(node, Leaf):
            beta = node.model.fit.beta
            out[idx] = beta[0] + predictors[idx] @ beta[1:]
        else:
            mask = predictors[idx, node.decision.column_index] < node.decision.threshold
            stack.append((node.left, idx[mask]))
            stack.append((node.right, idx[~mask]))
    return out


def forecast(
    tree: SetarTree,
    collection: SeriesCollection,
    horizon: int,
    future_covariates=None,
) -> ForecastMatrix:
    """Recursive multi-step forecasts for every series in the collection."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    specs = tree.covariate_specs
    test = create_test_set(collection, tree.n_lags, specs, future_covariates)
    if test.n_predictors != tree.n_predictors:
        raise DimensionMismatch(
            f"test rows have {test.n_predictors} predictors, tree expects {tree.n_predictors}"
        )
    values = np.empty((len(collection), horizon))
    for step in range(horizon):
        step_pred = predict_rows(tree.root, test.predictors)
        values[:, step] = step_pred
        if step + 1 < horizon:
            block = None
            if specs:
                block = encode_future_covariate_block(
                    collection, specs, future_covariates, step + 1
                )
            test = update_test_set(test, step_pred, block, step=step + 1)
    return ForecastMatrix(series_ids=collection.ids, values=values)
