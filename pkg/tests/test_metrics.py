from fractions import Fraction

import numpy as np
import pytest

from setar.data import ForecastMatrix
from setar.errors import LengthMismatch, MissingActuals, ZeroDenominator
from setar.metrics import evaluate, heuristic_lags, mase, msmape


def test_msmape_zero_error():
    assert msmape([10.0], [10.0]) == 0.0
    assert msmape([0.0], [0.0]) == 0.0  # denominator floor engages


def test_msmape_hand_computed():
    # |15-10| / ((|10|+|15|+0.1)/2) * 100 = 500/12.55
    expected = float(Fraction(100) * Fraction(5) / (Fraction("25.1") / 2))
    assert expected == pytest.approx(39.84063745019921, rel=1e-12)
    assert msmape([15.0], [10.0]) == pytest.approx(expected, rel=1e-12)
    assert msmape([15.0], [10.0]) == 100.0 * 5.0 / (max(25.1, 0.6) / 2.0)


def test_msmape_symmetric_and_bounded(rng):
    for _ in range(50):
        n = int(rng.integers(1, 20))
        f = rng.normal(size=n) * 10
        y = rng.normal(size=n) * 10
        assert msmape(f, y) == pytest.approx(msmape(y, f), rel=1e-12)
        if np.all(np.abs(f) + np.abs(y) + 0.1 >= 0.6):
            assert msmape(f, y) <= 200.0 + 1e-9


def test_msmape_length_mismatch():
    with pytest.raises(LengthMismatch):
        msmape([1.0, 2.0], [1.0])
    with pytest.raises(LengthMismatch):
        msmape([], [])


def test_mase_hand_computed():
    # training [1,2,3,4], S=1: naive error mean is 1; one-step error is 1
    assert mase([6.0], [5.0], [1.0, 2.0, 3.0, 4.0], 1) == pytest.approx(1.0, rel=1e-14)
    assert mase([5.0], [5.0], [1.0, 2.0, 3.0, 4.0], 1) == 0.0


def test_mase_zero_denominator():
    with pytest.raises(ZeroDenominator):
        mase([1.0], [2.0], [3.0, 3.0, 3.0], 1)
    with pytest.raises(ZeroDenominator):
        mase([1.0], [2.0], [3.0], 1)  # training not longer than seasonality


def test_mase_seasonal_lag():
    training = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0]
    # S=2: seasonal-naive differences are all zero
    with pytest.raises(ZeroDenominator):
        mase([2.0], [1.0], training, 2)
    # S=1: alternating series has naive error 1
    assert mase([2.0], [1.0], training, 1) == pytest.approx(1.0)


def test_mase_scale_invariance(rng):
    for _ in range(30):
        n = int(rng.integers(1, 12))
        m = int(rng.integers(n + 2, 40))
        f = rng.normal(size=n)
        y = rng.normal(size=n)
        train = rng.normal(size=m)
        c = float(rng.uniform(0.1, 50.0))
        base = mase(f, y, train, 1)
        scaled = mase(c * f, c * y, c * train, 1)
        assert scaled == pytest.approx(base, rel=1e-10)


def test_heuristic_lags_paper_cases():
    assert heuristic_lags(7, 48) == 10
    assert heuristic_lags(12, 24) == 15
    assert heuristic_lags(None, 8) == 10
    assert heuristic_lags(4, 8) == 10  # small seasonal candidate falls back
    assert heuristic_lags(1, 8) == 10
    assert heuristic_lags(None, 2) == 5
    assert heuristic_lags(16, 8) == 20
    assert heuristic_lags(7, 48) == heuristic_lags(7, 48)


def report_for(values_by_series, actuals, training):
    ids = tuple(values_by_series)
    fm = ForecastMatrix(
        series_ids=ids, values=np.array([values_by_series[i] for i in ids])
    )
    return evaluate(fm, actuals, training, seasonality=1)


def test_evaluate_single_series():
    report = report_for(
        {"a": [5.0, 6.0]}, {"a": np.array([5.5, 6.5])}, {"a": np.array([1.0, 2.0, 3.0])}
    )
    assert report.mean_msmape == report.median_msmape == report.per_series[0].msmape
    assert report.mean_mase == report.median_mase == report.per_series[0].mase


def test_evaluate_two_series_aggregates():
    # construct errors so the two msMAPE values are exactly 10 and 30
    # msmape([F],[Y]) with Y=10: choose F so that the value lands as wanted
    fm = ForecastMatrix(series_ids=("a", "b"), values=np.array([[10.0], [10.0]]))
    actuals = {"a": np.array([10.0]), "b": np.array([10.0])}
    training = {"a": np.arange(5.0), "b": np.arange(5.0)}
    base = evaluate(fm, actuals, training, 1)
    assert base.mean_msmape == 0.0

    report = report_for(
        {"a": [11.0], "b": [13.0]},
        {"a": np.array([9.0]), "b": np.array([7.0])},
        {"a": np.arange(5.0), "b": np.arange(5.0)},
    )
    values = [s.msmape for s in report.per_series]
    assert report.mean_msmape == pytest.approx(np.mean(values))
    assert report.median_msmape == pytest.approx(np.median(values))
    assert report.mean_msmape == pytest.approx((values[0] + values[1]) / 2)


def test_evaluate_median_is_midpoint_for_even_counts():
    report = report_for(
        {"a": [11.0], "b": [13.0], "c": [15.0], "d": [17.0]},
        {k: np.array([10.0]) for k in "abcd"},
        {k: np.arange(6.0) for k in "abcd"},
    )
    values = sorted(s.msmape for s in report.per_series)
    assert report.median_msmape == pytest.approx((values[1] + values[2]) / 2)


def test_evaluate_missing_actuals():
    fm = ForecastMatrix(series_ids=("a",), values=np.array([[1.0]]))
    with pytest.raises(MissingActuals):
        evaluate(fm, {}, {"a": np.arange(4.0)}, 1)


def test_evaluate_excludes_undefined_mase_with_warning():
    fm = ForecastMatrix(series_ids=("a", "b"), values=np.array([[1.0], [2.0]]))
    actuals = {"a": np.array([1.5]), "b": np.array([2.5])}
    training = {"a": np.full(6, 3.0), "b": np.arange(6.0)}
    with pytest.warns(UserWarning):
        report = evaluate(fm, actuals, training, 1)
    assert report.mase_undefined == ("a",)
    assert report.per_series[0].mase is None
    assert report.per_series[1].mase is not None
    assert report.mean_mase == pytest.approx(report.per_series[1].mase)


def test_report_dict_is_self_consistent():
    report = report_for(
        {"a": [11.0], "b": [13.0]},
        {"a": np.array([9.0]), "b": np.array([7.0])},
        {"a": np.arange(5.0), "b": np.arange(5.0)},
    )
    payload = report.as_dict()
    per = payload["per_series"]
    assert payload["aggregates"]["mean_msmape"] == pytest.approx(
        np.mean([p["msmape"] for p in per])
    )
    assert payload["config"]["seasonality"] == 1
    assert payload["config"]["epsilon"] == 0.1
