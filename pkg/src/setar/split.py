"""Grid search for the best (column, threshold) node split.

For every candidate column the node's rows are sorted by that column and
a fixed grid of equispaced quantiles is scanned. Moving the threshold
through the sorted rows only ever adds rows to the left child, so left
fits come from running inner-product totals and right fits from the
parent totals minus the left totals; no candidate ever refits from raw
rows. The winning split minimizes total child SSE, ties broken by lower
column index then lower threshold.

Convention: the left child takes rows with column value strictly below
the threshold, the right child takes the rest (>=). Routing at forecast
time uses the same comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DegenerateColumn
from .linalg import RANK_TOL, InnerProducts, inner_products_from_rows

DEFAULT_GRID_SIZE = 15


@dataclass(frozen=True)
class ThresholdGrid:
    """Sorted candidate thresholds for one column."""

    values: np.ndarray
    source_column: int


@dataclass(frozen=True)
class SplitDecision:
    column_index: int
    threshold: float
    left_sse: float
    right_sse: float
    total_sse: float
    left_count: int
    right_count: int


@njit(cache=True, nogil=True)
def _grid_from_sorted(sorted_vals, q):
    """Quantiles k/(q+1), k=1..q, of a sorted vector.

    Linear interpolation of order statistics; duplicates collapsed and
    values on the column min/max dropped (they cannot produce two
    non-empty children under the strict-< convention on both of two
    distinct values).
    """
    n = sorted_vals.shape[0]
    lo_val = sorted_vals[0]
    hi_val = sorted_vals[n - 1]
    out = np.empty(q, dtype=np.float64)
    count = 0
    prev = np.nan
    for k in range(1, q + 1):
        pos = k * (n - 1) / (q + 1)
        idx = int(np.floor(pos))
        frac = pos - idx
        if idx >= n - 1:
            value = sorted_vals[n - 1]
        elif frac == 0.0:
            value = sorted_vals[idx]
        else:
            value = sorted_vals[idx] + frac * (sorted_vals[idx + 1] - sorted_vals[idx])
        if value <= lo_val or value >= hi_val:
            continue
        if count > 0 and value == prev:
            continue
        out[count] = value
        prev = value
        count += 1
    return out[:count]


@njit(cache=True, nogil=True)
def _chol_solve(mat, rhs, tol):
    """Solve mat @ x = rhs via Cholesky with a pivot floor.

    Returns (x, ok); ok is False when the matrix is rank deficient
    within tolerance.
    """
    p = mat.shape[0]
    chol = np.zeros((p, p))
    max_diag = 0.0
    for i in range(p):
        if mat[i, i] > max_diag:
            max_diag = mat[i, i]
    floor = tol * max_diag
    for j in range(p):
        s = mat[j, j]
        for k in range(j):
            s -= chol[j, k] * chol[j, k]
        if not np.isfinite(s) or s <= floor:
            return np.zeros(p), False
        chol[j, j] = np.sqrt(s)
        for i in range(j + 1, p):
            t = mat[i, j]
            for k in range(j):
                t -= chol[i, k] * chol[j, k]
            chol[i, j] = t / chol[j, j]
    # forward then back substitution
    z = np.empty(p)
    for i in range(p):
        t = rhs[i]
        for k in range(i):
            t -= chol[i, k] * z[k]
        z[i] = t / chol[i, i]
    x = np.empty(p)
    for i in range(p - 1, -1, -1):
        t = z[i]
        for k in range(i + 1, p):
            t -= chol[k, i] * x[k]
        x[i] = t / chol[i, i]
    return x, True


@njit(cache=True, nogil=True)
def _scan_kernel(aug, y, parent_xtx, parent_xty, parent_yty, cand_cols, q, min_child, tol):
    """Scan all candidate columns of one node.

    Returns (found, column, threshold, left_sse, right_sse, left_count,
    left_xtx, left_xty, left_yty) for the total-SSE minimizer. Candidate
    order is column-ascending, threshold-ascending, and the comparison is
    strict, which makes ties resolve to the lowest column then lowest
    threshold.
    """
    n, p1 = aug.shape
    best_total = np.inf
    found = False
    best_col = -1
    best_thr = 0.0
    best_sse_l = 0.0
    best_sse_r = 0.0
    best_cnt_l = 0
    best_xtx = np.zeros((p1, p1))
    best_xty = np.zeros(p1)
    best_yty = 0.0

    col_buf = np.empty(n)
    xs = np.empty((n, p1))
    ys = np.empty(n)
    cs = np.empty(n)

    for cc in range(cand_cols.shape[0]):
        col = cand_cols[cc]
        for r in range(n):
            col_buf[r] = aug[r, col + 1]
        order = np.argsort(col_buf, kind="mergesort")
        for r in range(n):
            src = order[r]
            ys[r] = y[src]
            cs[r] = col_buf[src]
            for j in range(p1):
                xs[r, j] = aug[src, j]
        if cs[0] == cs[n - 1]:
            continue  # constant column
        grid = _grid_from_sorted(cs, q)
        if grid.shape[0] == 0:
            continue
        bounds = np.searchsorted(cs, grid, side="left")

        left_xtx = np.zeros((p1, p1))
        left_xty = np.zeros(p1)
        left_yty = 0.0
        prev = 0
        for k in range(grid.shape[0]):
            b = bounds[k]
            for r in range(prev, b):
                yr = ys[r]
                left_yty += yr * yr
                for i in range(p1):
                    v = xs[r, i]
                    left_xty[i] += v * yr
                    for j in range(i, p1):
                        left_xtx[i, j] += v * xs[r, j]
            prev = b
            cnt_l = b
            cnt_r = n - b
            if cnt_l < min_child or cnt_r < min_child:
                continue
            work_l = np.empty((p1, p1))
            work_r = np.empty((p1, p1))
            for i in range(p1):
                for j in range(i, p1):
                    work_l[i, j] = left_xtx[i, j]
                    work_l[j, i] = left_xtx[i, j]
                    work_r[i, j] = parent_xtx[i, j] - left_xtx[i, j]
                    work_r[j, i] = work_r[i, j]
            beta_l, ok = _chol_solve(work_l, left_xty, tol)
            if not ok:
                continue
            rhs_r = parent_xty - left_xty
            beta_r, ok = _chol_solve(work_r, rhs_r, tol)
            if not ok:
                continue
            sse_l = left_yty - beta_l @ work_l @ beta_l
            if sse_l < 0.0:
                sse_l = 0.0
            sse_r = (parent_yty - left_yty) - beta_r @ work_r @ beta_r
            if sse_r < 0.0:
                sse_r = 0.0
            total = sse_l + sse_r
            if np.isfinite(total) and total < best_total:
                best_total = total
                found = True
                best_col = col
                best_thr = grid[k]
                best_sse_l = sse_l
                best_sse_r = sse_r
                best_cnt_l = cnt_l
                best_xtx = work_l.copy()
                best_xty = left_xty.copy()
                best_yty = left_yty
    return (
        found, best_col, best_thr, best_sse_l, best_sse_r, best_cnt_l,
        best_xtx, best_xty, best_yty,
    )


def make_threshold_grid(
    column_values: np.ndarray, q: int = DEFAULT_GRID_SIZE, source_column: int = -1
) -> ThresholdGrid:
    """Equispaced-quantile threshold grid for one column."""
    if q < 1:
        raise ValueError("grid size must be >= 1")
    values = np.sort(np.asarray(column_values, dtype=np.float64))
    if values.shape[0] < 2 or values[0] == values[-1]:
        raise DegenerateColumn("column is constant")
    grid = _grid_from_sorted(values, q)
    if grid.shape[0] == 0:
        raise DegenerateColumn()
    return ThresholdGrid(values=grid, source_column=source_column)


def min_child_size(n_predictors: int) -> int:
    """Smallest child leaving one residual degree of freedom: params + 1."""
    return n_predictors + 2


def scan_for_split(
    aug: np.ndarray,
    targets: np.ndarray,
    parent_ip: InnerProducts,
    candidate_columns: np.ndarray,
    q: int,
    min_child: int,
) -> tuple[SplitDecision, InnerProducts] | None:
    """Run the kernel for one node; also return the left child's inner products."""
    result = _scan_kernel(
        aug, targets, parent_ip.xtx, parent_ip.xty, parent_ip.yty,
        candidate_columns, q, min_child, RANK_TOL,
    )
    found, col, thr, sse_l, sse_r, cnt_l, xtx_l, xty_l, yty_l = result
    if not found:
        return None
    decision = SplitDecision(
        column_index=int(col),
        threshold=float(thr),
        left_sse=float(sse_l),
        right_sse=float(sse_r),
        total_sse=float(sse_l) + float(sse_r),
        left_count=int(cnt_l),
        right_count=int(parent_ip.count - cnt_l),
    )
    left_ip = InnerProducts(xtx=xtx_l, xty=xty_l, yty=float(yty_l), count=int(cnt_l))
    return decision, left_ip


def get_opt_params(
    predictors: np.ndarray,
    targets: np.ndarray,
    candidate_columns: np.ndarray | None = None,
    q: int = DEFAULT_GRID_SIZE,
) -> SplitDecision | None:
    """Best split of the given rows, or None when no candidate is valid."""
    predictors = np.ascontiguousarray(predictors, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    n, p = predictors.shape
    if candidate_columns is None:
        candidate_columns = np.arange(p, dtype=np.int64)
    else:
        candidate_columns = np.asarray(candidate_columns, dtype=np.int64)
    min_child = min_child_size(p)
    if n < 2 * min_child:
        return None
    aug = np.ascontiguousarray(np.hstack([np.ones((n, 1)), predictors]))
    parent_ip = inner_products_from_rows(predictors, targets)
    found = scan_for_split(aug, targets, parent_ip, candidate_columns, q, min_child)
    return None if found is None else found[0]


def split_node(
    predictors: np.ndarray, decision: SplitDecision
) -> tuple[np.ndarray, np.ndarray]:
    """Row indices of the (left, right) children under the decision."""
    column = np.asarray(predictors)[:, decision.column_index]
    mask = column < decision.threshold
    left = np.flatnonzero(mask)
    right = np.flatnonzero(~mask)
    return left, right
