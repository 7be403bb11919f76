import numpy as np
import pytest

from setar.data import (
    CovariateSpec,
    Series,
    SeriesCollection,
    build_covariate_specs,
    create_input_matrix,
    create_test_set,
    encode_covariates,
    update_test_set,
)
from setar.errors import (
    CovariateMisaligned,
    DataError,
    LengthMismatch,
    MissingFutureCovariates,
    SeriesTooShort,
    UnknownCategory,
)


def collection_of(*value_lists):
    return SeriesCollection(
        series=tuple(
            Series(id=f"s{i+1}", values=np.array(v, dtype=float))
            for i, v in enumerate(value_lists)
        )
    )


def test_windowing_definition():
    mat = create_input_matrix(collection_of([1, 2, 3, 4, 5]), 2)
    assert mat.column_names == ("L1", "L2")
    assert mat.predictors.tolist() == [[2, 1], [3, 2], [4, 3]]
    assert mat.targets.tolist() == [3, 4, 5]
    assert mat.target_times.tolist() == [2, 3, 4]
    row = mat.row(1)
    assert row.series_id == "s1" and row.target == 4.0 and row.target_time == 3


def test_pooling_two_series():
    mat = create_input_matrix(collection_of([1, 2, 3, 4, 5], [6, 7, 8, 9, 10]), 2)
    assert mat.n_rows == 6  # (5-2) * 2
    assert mat.series_ids == ("s1", "s2")
    assert mat.series_index.tolist() == [0, 0, 0, 1, 1, 1]


def test_series_too_short():
    with pytest.raises(SeriesTooShort):
        create_input_matrix(collection_of([1, 2, 3]), 3)


def test_row_count_formula(rng):
    lengths = [7, 12, 30]
    coll = collection_of(*(rng.normal(size=m).tolist() for m in lengths))
    mat = create_input_matrix(coll, 4)
    assert mat.n_rows == sum(m - 4 for m in lengths)


def test_round_trip_targets_reconstruct_series():
    values = [0.5, 1.5, 2.0, 3.5, 2.5, 4.0]
    mat = create_input_matrix(collection_of(values), 2)
    assert mat.targets.tolist() == values[2:]


def test_pooling_is_order_independent_at_row_level():
    a, b = [1, 2, 3, 4], [9, 8, 7, 6, 5]
    mat1 = create_input_matrix(collection_of(a, b), 2)
    coll2 = SeriesCollection(
        series=(
            Series(id="s2", values=np.array(b, dtype=float)),
            Series(id="s1", values=np.array(a, dtype=float)),
        )
    )
    mat2 = create_input_matrix(coll2, 2)
    rows1 = {tuple(mat1.predictors[i]) + (mat1.targets[i],) for i in range(mat1.n_rows)}
    rows2 = {tuple(mat2.predictors[i]) + (mat2.targets[i],) for i in range(mat2.n_rows)}
    assert rows1 == rows2


def test_matrix_is_immutable():
    mat = create_input_matrix(collection_of([1, 2, 3, 4]), 2)
    with pytest.raises(ValueError):
        mat.predictors[0, 0] = 99.0
    with pytest.raises(ValueError):
        mat.targets[0] = 99.0


def test_missing_values_rejected():
    with pytest.raises(DataError):
        Series(id="bad", values=np.array([1.0, np.nan, 2.0]))
    with pytest.raises(DataError):
        Series(id="bad", values=np.array([1.0, np.inf]))


def test_duplicate_ids_rejected():
    with pytest.raises(DataError):
        SeriesCollection(
            series=(
                Series(id="x", values=np.ones(3)),
                Series(id="x", values=np.ones(4)),
            )
        )


def test_encode_covariates():
    numeric = CovariateSpec(name="price", kind="numeric")
    assert encode_covariates(3.5, numeric).tolist() == [3.5]
    day = CovariateSpec(name="day", kind="categorical", categories=("Mon", "Tue", "Wed"))
    assert encode_covariates("Tue", day).tolist() == [0.0, 1.0, 0.0]
    with pytest.raises(UnknownCategory):
        encode_covariates("Fri", day)


def make_covariate_collection():
    series = (
        Series(
            id="a",
            values=np.array([1.0, 2.0, 3.0, 4.0, 5.0]),
            covariates={
                "price": np.array([10.0, 11.0, 12.0, 13.0, 14.0]),
                "day": ("Mon", "Tue", "Wed", "Mon", "Tue"),
            },
        ),
        Series(
            id="b",
            values=np.array([5.0, 6.0, 7.0, 8.0]),
            covariates={
                "price": np.array([20.0, 21.0, 22.0, 23.0]),
                "day": ("Wed", "Mon", "Tue", "Wed"),
            },
        ),
    )
    return SeriesCollection(
        series=series, covariate_kinds={"price": "numeric", "day": "categorical"}
    )


def test_covariate_specs_frozen_in_observation_order():
    specs = build_covariate_specs(make_covariate_collection())
    assert [s.name for s in specs] == ["price", "day"]
    assert specs[1].categories == ("Mon", "Tue", "Wed")


def test_matrix_with_covariates_aligned_to_target_time():
    coll = make_covariate_collection()
    specs = build_covariate_specs(coll)
    mat = create_input_matrix(coll, 2, specs)
    assert mat.column_names == ("L1", "L2", "price", "day=Mon", "day=Tue", "day=Wed")
    # series a, first row targets time 2 whose covariates are 12.0 / Wed
    assert mat.predictors[0].tolist() == [2.0, 1.0, 12.0, 0.0, 0.0, 1.0]
    # series b, last row targets time 3: price 23.0, day Wed
    assert mat.predictors[-1].tolist() == [7.0, 6.0, 23.0, 0.0, 0.0, 1.0]


def test_covariate_length_mismatch():
    with pytest.raises(CovariateMisaligned):
        Series(id="a", values=np.ones(4), covariates={"price": np.ones(3)})
    with pytest.raises(CovariateMisaligned):
        SeriesCollection(
            series=(Series(id="a", values=np.ones(4)),),
            covariate_kinds={"price": "numeric"},
        )


def test_create_test_set_definition():
    test = create_test_set(collection_of([1, 2, 3, 4, 5]), 3)
    assert test.predictors.tolist() == [[5.0, 4.0, 3.0]]
    assert np.isnan(test.targets).all()
    assert test.target_times.tolist() == [5]


def test_create_test_set_one_row_per_series(rng):
    coll = collection_of(*(rng.normal(size=10).tolist() for _ in range(100)))
    test = create_test_set(coll, 3)
    assert test.n_rows == 100


def test_create_test_set_too_short():
    with pytest.raises(SeriesTooShort):
        create_test_set(collection_of([1.0, 2.0]), 3)


def test_update_test_set_shift():
    test = create_test_set(collection_of([1, 2, 3, 4, 5]), 3)
    updated = update_test_set(test, np.array([6.0]))
    assert updated.predictors.tolist() == [[6.0, 5.0, 4.0]]
    assert updated.target_times.tolist() == [6]


def test_update_consumes_one_forecast_per_row():
    test = create_test_set(collection_of([1, 2, 3], [4, 5, 6]), 2)
    with pytest.raises(LengthMismatch):
        update_test_set(test, np.array([1.0]))
    horizon = 4
    current = test
    for step in range(horizon):
        current = update_test_set(current, np.full(2, float(step)))
    assert current.target_times.tolist() == [3 + horizon, 3 + horizon]


def test_update_with_true_values_reproduces_extended_windows():
    values = [0.3, 1.1, 0.7, 1.9, 0.2, 1.4, 0.8]
    lag = 3
    head, tail = values[:5], values[5:]
    full = create_input_matrix(collection_of(values), lag)
    window_at = {
        int(full.target_times[i]): full.predictors[i].tolist()
        for i in range(full.n_rows)
    }
    # the initial test row is the window targeting time 5; each update with
    # the true continuation reproduces the next embedded window exactly
    current = create_test_set(collection_of(head), lag)
    assert current.predictors[0].tolist() == window_at[5]
    current = update_test_set(current, np.array([values[5]]))
    assert current.predictors[0].tolist() == window_at[6]
    del tail


def test_update_test_set_requires_future_covariates():
    coll = make_covariate_collection()
    specs = build_covariate_specs(coll)
    future = {
        "a": {"price": [15.0, 16.0], "day": ["Wed", "Mon"]},
        "b": {"price": [24.0, 25.0], "day": ["Mon", "Tue"]},
    }
    test = create_test_set(coll, 2, specs, future)
    assert test.predictors[0, 2:].tolist() == [15.0, 0.0, 0.0, 1.0]
    with pytest.raises(MissingFutureCovariates):
        create_test_set(coll, 2, specs, None)
    with pytest.raises(MissingFutureCovariates):
        update_test_set(test, np.zeros(2), covariate_block=None, step=1)


def test_future_covariates_exhausted():
    coll = make_covariate_collection()
    specs = build_covariate_specs(coll)
    future = {
        "a": {"price": [15.0], "day": ["Wed"]},
        "b": {"price": [24.0], "day": ["Mon"]},
    }
    from setar.data import encode_future_covariate_block

    with pytest.raises(MissingFutureCovariates):
        encode_future_covariate_block(coll, specs, future, 1)
