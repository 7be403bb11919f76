"""Split acceptance rules: linearity F-test and error-reduction threshold.

A proposed split is kept only if it is "worth enough". The F-test asks
whether the two child fits explain significantly more than the parent
fit; the error-reduction rule asks for a minimum relative SSE drop. The
significance level shrinks as the tree deepens, halving per level by
default, which keeps the family-wise error of the level's binary splits
constant.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InsufficientDf
from .fdist import f_upper_tail

CRITERIA = ("lin_test", "error_red", "both")


@dataclass(frozen=True)
class StoppingConfig:
    criterion: str = "both"
    alpha0: float = 0.05
    significance_divider: float = 2.0
    error_threshold: float = 0.03
    max_depth: int = 1000

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")
        if not 0.0 < self.alpha0 < 1.0:
            raise ValueError("alpha0 must lie in (0, 1)")
        if self.significance_divider <= 1.0:
            raise ValueError("significance divider must exceed 1")
        if self.error_threshold < 0.0:
            raise ValueError("error threshold must be >= 0")
        if self.max_depth < 0:
            raise ValueError("max depth must be >= 0")


@dataclass(frozen=True)
class FTestResult:
    f_stat: float
    df1: int
    df2: int
    p_value: float


def alpha_at_depth(alpha0: float, divider: float, depth: int) -> float:
    """Significance level for tree level ``depth`` (level 0 = root)."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    return alpha0 / divider**depth


def check_linearity(
    parent_sse: float, child_total_sse: float, n: int, l: int, alpha: float
) -> tuple[bool, FTestResult]:
    """General linear F-test of the parent fit against the two child fits.

    ``n`` is the parent row count and ``l`` the number of predictor
    columns, so the parent model has l+1 parameters and the children
    2(l+1) together. Passing means the split is significant at ``alpha``.
    """
    df1 = l + 1
    df2 = n - 2 * l - 2
    if df2 < 1:
        raise InsufficientDf(n, l)
    if child_total_sse > parent_sse:
        child_total_sse = parent_sse  # clamp numerical excess
    if child_total_sse <= 0.0:
        if parent_sse > 0.0:
            # Perfect child fit: infinitely significant.
            return True, FTestResult(float("inf"), df1, df2, 0.0)
        return False, FTestResult(0.0, df1, df2, 1.0)
    f_stat = ((parent_sse - child_total_sse) / df1) / (child_total_sse / df2)
    p_value = f_upper_tail(f_stat, df1, df2)
    return p_value < alpha, FTestResult(f_stat, df1, df2, p_value)


def check_error_reduction(
    parent_sse: float, child_total_sse: float, error_threshold: float
) -> bool:
    """True when splitting reduces SSE by at least the given fraction."""
    if parent_sse <= 0.0:
        return False
    return (parent_sse - child_total_sse) / parent_sse >= error_threshold


def is_good_split(parent_fit, child_fits, config: StoppingConfig, depth: int) -> bool:
    """Dispatch the configured criteria for one proposed split.

    ``parent_fit`` and ``child_fits`` are :class:`~setar.linalg.LinearFit`
    values for the node and its two children. An F-test without enough
    residual degrees of freedom rejects the split.
    """
    parent_sse = parent_fit.sse
    child_sse = sum(fit.sse for fit in child_fits)
    n = parent_fit.n_obs
    l = parent_fit.n_params - 1
    alpha = alpha_at_depth(config.alpha0, config.significance_divider, depth)

    if config.criterion == "error_red":
        return check_error_reduction(parent_sse, child_sse, config.error_threshold)
    try:
        lin_ok, _ = check_linearity(parent_sse, child_sse, n, l, alpha)
    except InsufficientDf:
        return False
    if config.criterion == "lin_test":
        return lin_ok
    return lin_ok and check_error_reduction(parent_sse, child_sse, config.error_threshold)
