"""Least-squares fitting of pooled linear autoregressions.

Fits run through the normal equations with the intercept column folded
into the accumulated inner products, so a fit over any row set is fully
determined by the triple (B, c, d) = (sum of [1,x][1,x]^T, sum of [1,x]y,
sum of y^2). Inner products are additive over disjoint row sets, which is
what makes the threshold scan incremental: the right child of a split is
always ``parent - left`` without touching the right child's rows.

No regularization is applied anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularSystem

# Relative pivot tolerance for treating the normal-equation matrix as
# rank deficient: a Cholesky pivot below RANK_TOL * max diagonal fails.
RANK_TOL = 1e-10


@dataclass(frozen=True)
class LinearFit:
    """Least-squares fit: intercept-first coefficients plus its SSE."""

    beta: np.ndarray
    sse: float
    n_obs: int
    n_params: int

    def predict(self, predictors: np.ndarray) -> np.ndarray:
        predictors = np.asarray(predictors, dtype=np.float64)
        if predictors.shape[-1] != self.n_params - 1:
            raise DimensionMismatch(
                f"fit expects {self.n_params - 1} predictors, got {predictors.shape[-1]}"
            )
        return self.beta[0] + predictors @ self.beta[1:]


@dataclass(frozen=True)
class InnerProducts:
    """Accumulated inner products of augmented rows [1, x] against y."""

    xtx: np.ndarray  # (p+1, p+1), symmetric
    xty: np.ndarray  # (p+1,)
    yty: float
    count: int

    @property
    def n_params(self) -> int:
        return self.xty.shape[0]

    def __add__(self, other: "InnerProducts") -> "InnerProducts":
        if self.n_params != other.n_params:
            raise DimensionMismatch("inner products have different column counts")
        return InnerProducts(
            self.xtx + other.xtx, self.xty + other.xty, self.yty + other.yty,
            self.count + other.count,
        )

    def __sub__(self, other: "InnerProducts") -> "InnerProducts":
        if self.n_params != other.n_params:
            raise DimensionMismatch("inner products have different column counts")
        assert other.count <= self.count, "complement of a larger row set"
        return InnerProducts(
            self.xtx - other.xtx, self.xty - other.xty, self.yty - other.yty,
            self.count - other.count,
        )


def zero_inner_products(n_predictors: int) -> InnerProducts:
    p1 = n_predictors + 1
    return InnerProducts(np.zeros((p1, p1)), np.zeros(p1), 0.0, 0)


def accumulate(ip: InnerProducts, predictors: np.ndarray, targets: np.ndarray) -> InnerProducts:
    """Add the rank updates of the given rows to ``ip``."""
    predictors = np.asarray(predictors, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictors.ndim != 2 or predictors.shape[1] != ip.n_params - 1:
        raise DimensionMismatch(
            f"rows have {predictors.shape[-1] if predictors.ndim == 2 else '?'} predictors, "
            f"inner products expect {ip.n_params - 1}"
        )
    if predictors.shape[0] != targets.shape[0]:
        raise DimensionMismatch("predictor and target row counts differ")
    if predictors.shape[0] == 0:
        return ip
    aug = np.hstack([np.ones((predictors.shape[0], 1)), predictors])
    return InnerProducts(
        ip.xtx + aug.T @ aug,
        ip.xty + aug.T @ targets,
        ip.yty + float(targets @ targets),
        ip.count + predictors.shape[0],
    )


def inner_products_from_rows(predictors: np.ndarray, targets: np.ndarray) -> InnerProducts:
    predictors = np.asarray(predictors, dtype=np.float64)
    return accumulate(zero_inner_products(predictors.shape[1]), predictors, targets)


def right_complement(parent: InnerProducts, left: InnerProducts) -> InnerProducts:
    """Inner products of ``parent``'s rows not in ``left``."""
    return parent - left


def solve_normal_equations(xtx: np.ndarray, xty: np.ndarray) -> np.ndarray:
    """Solve B beta = c, requiring B positive definite within tolerance."""
    try:
        chol = np.linalg.cholesky(xtx)
    except np.linalg.LinAlgError:
        raise SingularSystem("normal-equation matrix is not positive definite") from None
    pivots = np.diagonal(chol) ** 2
    if pivots.min() <= RANK_TOL * max(xtx.diagonal().max(), 0.0):
        raise SingularSystem("normal-equation matrix is rank deficient within tolerance")
    return np.linalg.solve(xtx, xty)


def fit_from_inner_products(ip: InnerProducts, allow_singular: bool = False) -> LinearFit:
    """Fit from accumulated inner products.

    With ``allow_singular`` a rank-deficient system falls back to the
    minimum-norm solution of the normal equations so that prediction
    stays total; otherwise it raises :class:`SingularSystem`.
    """
    try:
        beta = solve_normal_equations(ip.xtx, ip.xty)
    except SingularSystem:
        if not allow_singular:
            raise
        beta = np.linalg.lstsq(ip.xtx, ip.xty, rcond=None)[0]
    sse = float(ip.yty - beta @ ip.xtx @ beta)
    if sse < 0.0:
        sse = 0.0
    return LinearFit(beta=beta, sse=sse, n_obs=ip.count, n_params=ip.n_params)


def fit_least_squares(
    predictors: np.ndarray, targets: np.ndarray, allow_singular: bool = False
) -> LinearFit:
    """Least-squares fit of ``targets`` on an intercept plus ``predictors``."""
    return fit_from_inner_products(
        inner_products_from_rows(predictors, targets), allow_singular=allow_singular
    )
