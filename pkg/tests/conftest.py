import numpy as np
import pytest

from setar.data import Series, SeriesCollection
from setar.rng import Rng


def lag_matrix(values, lag):
    """Straightforward lag embedding used as an independent oracle."""
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0] - lag
    X = np.empty((n, lag))
    for k in range(1, lag + 1):
        X[:, k - 1] = values[lag - k : lag - k + n]
    return X, values[lag:]


def pooled_linear_ar(seed, n_series, length, coefs, intercept=0.0, sd=1.0, burn=100):
    """Pooled rows from one global linear AR process (oracle generator)."""
    k = len(coefs)
    series = []
    for s in range(n_series):
        sub = Rng(seed).substream(s)
        noise = sub.gauss_block(length + burn)
        y = np.zeros(length + burn)
        for t in range(k, length + burn):
            acc = intercept
            for j in range(k):
                acc += coefs[j] * y[t - 1 - j]
            y[t] = acc + sd * noise[t]
        series.append(y[burn:])
    return series


def linear_ar_collection(seed, n_series, length, coefs, intercept=0.0, sd=1.0):
    series = pooled_linear_ar(seed, n_series, length, coefs, intercept, sd)
    return SeriesCollection(
        series=tuple(Series(id=f"T{i+1}", values=v) for i, v in enumerate(series))
    )


def brute_force_fit(predictors, targets):
    """Reference least squares on raw rows: lstsq on [1 | X]."""
    aug = np.hstack([np.ones((predictors.shape[0], 1)), predictors])
    beta, *_ = np.linalg.lstsq(aug, targets, rcond=None)
    residuals = targets - aug @ beta
    return beta, float(residuals @ residuals)


def split_holdout(collection, horizon):
    train, test = [], {}
    for s in collection:
        train.append(Series(id=s.id, values=s.values[:-horizon].copy()))
        test[s.id] = s.values[-horizon:]
    return SeriesCollection(series=tuple(train)), test


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
