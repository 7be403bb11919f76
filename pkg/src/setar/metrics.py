"""Forecast accuracy metrics and dataset-level aggregation.

Two per-series metrics: a floored symmetric percentage error (msMAPE,
epsilon 0.1) and error scaled by the in-sample seasonal-naive error
(MASE). Aggregates are the mean and median of each across the dataset.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .data import ForecastMatrix
from .errors import LengthMismatch, MissingActuals, ZeroDenominator

MSMAPE_EPSILON = 0.1


def msmape(forecasts, actuals, epsilon: float = MSMAPE_EPSILON) -> float:
    """Mean symmetric percentage error with a floored denominator.

    100/N * sum |F-Y| / (max(|Y|+|F|+eps, 0.5+eps) / 2)
    """
    forecasts = np.asarray(forecasts, dtype=np.float64)
    actuals = np.asarray(actuals, dtype=np.float64)
    if forecasts.shape != actuals.shape or forecasts.ndim != 1 or forecasts.size == 0:
        raise LengthMismatch(
            f"forecasts {forecasts.shape} and actuals {actuals.shape} must be equal-length vectors"
        )
    denom = np.maximum(np.abs(actuals) + np.abs(forecasts) + epsilon, 0.5 + epsilon) / 2.0
    return float(100.0 * np.mean(np.abs(forecasts - actuals) / denom))


def mase(forecasts, actuals, training, seasonality: int) -> float:
    """Absolute error scaled by the training seasonal-naive error.

    sum |F-Y| / ((N / (M-S)) * sum_{k=S+1..M} |y_k - y_{k-S}|)
    """
    forecasts = np.asarray(forecasts, dtype=np.float64)
    actuals = np.asarray(actuals, dtype=np.float64)
    training = np.asarray(training, dtype=np.float64)
    if forecasts.shape != actuals.shape or forecasts.ndim != 1 or forecasts.size == 0:
        raise LengthMismatch(
            f"forecasts {forecasts.shape} and actuals {actuals.shape} must be equal-length vectors"
        )
    m = training.shape[0]
    if seasonality < 1 or m <= seasonality:
        raise ZeroDenominator(
            f"training length {m} must exceed seasonality {seasonality}"
        )
    n = forecasts.shape[0]
    naive = np.sum(np.abs(training[seasonality:] - training[:-seasonality]))
    denom = n / (m - seasonality) * naive
    if denom == 0.0:
        raise ZeroDenominator("training series is constant over the seasonal lag")
    return float(np.sum(np.abs(forecasts - actuals)) / denom)


def heuristic_lags(seasonality: int | None, horizon: int) -> int:
    """Lag count: 1.25x the seasonal cycle, else 1.25x the horizon.

    Fractional candidates round up to the next multiple of 5; a seasonal
    candidate below 10 falls back to the horizon rule.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")

    def settle(x: float) -> int:
        if x == math.floor(x):
            return int(x)
        return int(math.ceil(x / 5.0) * 5)

    if seasonality is not None:
        candidate = settle(seasonality * 1.25)
        if candidate >= 10:
            return candidate
    return settle(horizon * 1.25)


@dataclass(frozen=True)
class SeriesMetrics:
    series_id: str
    msmape: float
    mase: float | None  # None when the seasonal-naive denominator is zero


@dataclass(frozen=True)
class EvaluationReport:
    per_series: tuple
    mean_msmape: float
    median_msmape: float
    mean_mase: float | None
    median_mase: float | None
    mase_undefined: tuple
    horizon: int
    seasonality: int
    epsilon: float

    def as_dict(self) -> dict:
        return {
            "per_series": [
                {"series_id": s.series_id, "msmape": s.msmape, "mase": s.mase}
                for s in self.per_series
            ],
            "aggregates": {
                "mean_msmape": self.mean_msmape,
                "median_msmape": self.median_msmape,
                "mean_mase": self.mean_mase,
                "median_mase": self.median_mase,
            },
            "mase_undefined": list(self.mase_undefined),
            "config": {
                "horizon": self.horizon,
                "seasonality": self.seasonality,
                "epsilon": self.epsilon,
            },
        }


def evaluate(
    forecasts: ForecastMatrix,
    actuals: dict,
    training: dict,
    seasonality: int,
    epsilon: float = MSMAPE_EPSILON,
) -> EvaluationReport:
    """Per-series metrics plus mean/median aggregates.

    ``actuals`` and ``training`` map series id to the held-out values
    and the training values. Series whose MASE denominator is zero are
    reported but excluded from the MASE aggregates.
    """
    per_series = []
    undefined = []
    for si, sid in enumerate(forecasts.series_ids):
        if sid not in actuals:
            raise MissingActuals(sid)
        f = forecasts.values[si]
        y = np.asarray(actuals[sid], dtype=np.float64)
        if y.shape[0] != forecasts.horizon:
            raise LengthMismatch(
                f"series {sid!r}: got {y.shape[0]} actuals for horizon {forecasts.horizon}"
            )
        sm = msmape(f, y, epsilon)
        try:
            ms = mase(f, y, np.asarray(training[sid], dtype=np.float64), seasonality)
        except ZeroDenominator:
            ms = None
            undefined.append(sid)
        per_series.append(SeriesMetrics(series_id=sid, msmape=sm, mase=ms))
    if undefined:
        warnings.warn(
            f"MASE undefined for {len(undefined)} series (seasonal-naive error is zero); "
            "excluded from MASE aggregates",
            stacklevel=2,
        )
    msmapes = np.array([s.msmape for s in per_series])
    mases = np.array([s.mase for s in per_series if s.mase is not None])
    return EvaluationReport(
        per_series=tuple(per_series),
        mean_msmape=float(np.mean(msmapes)),
        median_msmape=float(np.median(msmapes)),
        mean_mase=float(np.mean(mases)) if mases.size else None,
        median_mase=float(np.median(mases)) if mases.size else None,
        mase_undefined=tuple(undefined),
        horizon=forecasts.horizon,
        seasonality=seasonality,
        epsilon=epsilon,
    )
