"""Series collections and the embedded lag matrix.

A collection of univariate series is turned into one pooled design
matrix: each row is a window of ``lag`` consecutive values (column L1 is
the most recent lag) plus optional covariate columns aligned to the
target's time index, and the value that follows the window is the
target. All types are immutable after construction and every operation
is a pure function, so everything here is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    CovariateMisaligned,
    DataError,
    DimensionMismatch,
    LengthMismatch,
    MissingFutureCovariates,
    SeriesTooShort,
    UnknownCategory,
)

FREQUENCIES = ("daily", "monthly", "quarterly")
NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Series:
    """One named series with optional per-timestep covariate columns."""

    id: str
    values: np.ndarray
    covariates: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 1:
            raise DataError(f"series {self.id!r} must be one-dimensional")
        if not np.isfinite(values).all():
            raise DataError(
                f"series {self.id!r} contains missing or non-finite values; "
                "clean the input upstream"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        for name, seq in self.covariates.items():
            if len(seq) != len(values):
                raise CovariateMisaligned(name, self.id)

    def __len__(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class SeriesCollection:
    """A set of series plus declared covariate kinds."""

    series: tuple
    covariate_kinds: dict = field(default_factory=dict)
    frequency_hint: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))
        ids = [s.id for s in self.series]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise DataError(f"duplicate series ids: {dupes}")
        if self.frequency_hint is not None and self.frequency_hint not in FREQUENCIES:
            raise DataError(
                f"frequency hint must be one of {FREQUENCIES} or None, "
                f"got {self.frequency_hint!r}"
            )
        for name, kind in self.covariate_kinds.items():
            if kind not in (NUMERIC, CATEGORICAL):
                raise DataError(f"covariate {name!r} has unknown kind {kind!r}")
            for s in self.series:
                if name not in s.covariates:
                    raise CovariateMisaligned(name, s.id)

    @property
    def ids(self):
        return tuple(s.id for s in self.series)

    def __iter__(self):
        return iter(self.series)

    def __len__(self):
        return len(self.series)


@dataclass(frozen=True)
class CovariateSpec:
    """Frozen encoding recipe for one covariate.

    Category sets are fixed at training time; unseen categories at
    forecast time are an error rather than a silent all-zeros row.
    """

    name: str
    kind: str
    categories: tuple = ()

    @property
    def n_columns(self) -> int:
        return 1 if self.kind == NUMERIC else len(self.categories)

    @property
    def column_names(self) -> tuple:
        if self.kind == NUMERIC:
            return (self.name,)
        return tuple(f"{self.name}={c}" for c in self.categories)


class InstanceRow(NamedTuple):
    predictors: np.ndarray
    target: float
    series_id: str
    target_time: int


@dataclass(frozen=True)
class EmbeddedMatrix:
    """Pooled (lag window + covariates -> target) rows from all series."""

    predictors: np.ndarray
    targets: np.ndarray
    series_index: np.ndarray
    target_times: np.ndarray
    series_ids: tuple
    column_names: tuple
    n_lags: int

    def __post_init__(self):
        for name in ("predictors", "targets", "series_index", "target_times"):
            arr = getattr(self, name)
            arr.flags.writeable = False

    @property
    def n_rows(self) -> int:
        return self.predictors.shape[0]

    @property
    def n_predictors(self) -> int:
        return self.predictors.shape[1]

    def row(self, i: int) -> InstanceRow:
        return InstanceRow(
            predictors=self.predictors[i],
            target=float(self.targets[i]),
            series_id=self.series_ids[self.series_index[i]],
            target_time=int(self.target_times[i]),
        )

    def take(self, indices: np.ndarray) -> "EmbeddedMatrix":
        """Row subset, keeping provenance."""
        indices = np.asarray(indices)
        return EmbeddedMatrix(
            predictors=self.predictors[indices].copy(),
            targets=self.targets[indices].copy(),
            series_index=self.series_index[indices].copy(),
            target_times=self.target_times[indices].copy(),
            series_ids=self.series_ids,
            column_names=self.column_names,
            n_lags=self.n_lags,
        )

    def select_columns(self, columns: np.ndarray) -> "EmbeddedMatrix":
        """Predictor-column subset (for per-tree feature sampling)."""
        columns = np.asarray(columns)
        return EmbeddedMatrix(
            predictors=self.predictors[:, columns].copy(),
            targets=self.targets.copy(),
            series_index=self.series_index.copy(),
            target_times=self.target_times.copy(),
            series_ids=self.series_ids,
            column_names=tuple(self.column_names[c] for c in columns),
            n_lags=int(np.sum(columns < self.n_lags)),
        )


def build_covariate_specs(collection: SeriesCollection) -> tuple:
    """Freeze covariate encodings from the training collection.

    Categories are collected in order of first appearance, scanning
    series in collection order and time ascending, so the encoding is
    deterministic.
    """
    specs = []
    for name, kind in collection.covariate_kinds.items():
        if kind == NUMERIC:
            specs.append(CovariateSpec(name=name, kind=NUMERIC))
            continue
        seen = []
        for s in collection:
            for value in s.covariates[name]:
                label = str(value)
                if label not in seen:
                    seen.append(label)
        specs.append(CovariateSpec(name=name, kind=CATEGORICAL, categories=tuple(seen)))
    return tuple(specs)


def encode_covariates(value, spec: CovariateSpec) -> np.ndarray:
    """Encode one covariate value: numeric passthrough or one-hot."""
    if spec.kind == NUMERIC:
        return np.array([float(value)], dtype=np.float64)
    label = str(value)
    try:
        pos = spec.categories.index(label)
    except ValueError:
        raise UnknownCategory(spec.name, label) from None
    row = np.zeros(len(spec.categories))
    row[pos] = 1.0
    return row


def covariate_column_names(specs) -> tuple:
    names = []
    for spec in specs:
        names.extend(spec.column_names)
    return tuple(names)


def _lag_column_names(lag: int) -> tuple:
    return tuple(f"L{k}" for k in range(1, lag + 1))


def _encode_covariate_rows(series: Series, specs, times) -> np.ndarray:
    blocks = []
    for spec in specs:
        raw = series.covariates[spec.name]
        if spec.kind == NUMERIC:
            col = np.asarray(raw, dtype=np.float64)[times]
            blocks.append(col.reshape(-1, 1))
        else:
            block = np.zeros((len(times), len(spec.categories)))
            for i, t in enumerate(times):
                block[i] = encode_covariates(raw[t], spec)
            blocks.append(block)
    return np.hstack(blocks)


def create_input_matrix(
    collection: SeriesCollection, lag: int, covariate_specs=None
) -> EmbeddedMatrix:
    """Pool every series' lag windows into one training matrix.

    A series of length m contributes exactly m - lag rows; series appear
    in collection order with time ascending inside each series.
    """
    if lag < 1:
        raise DataError(f"lag must be >= 1, got {lag}")
    specs = tuple(covariate_specs or ())
    pred_blocks, target_blocks, sid_blocks, time_blocks = [], [], [], []
    for si, s in enumerate(collection):
        m = len(s)
        if m <= lag:
            raise SeriesTooShort(s.id, m, lag + 1)
        n_rows = m - lag
        lag_block = np.empty((n_rows, lag))
        for k in range(1, lag + 1):
            lag_block[:, k - 1] = s.values[lag - k : m - k]
        times = np.arange(lag, m)
        if specs:
            lag_block = np.hstack([lag_block, _encode_covariate_rows(s, specs, times)])
        pred_blocks.append(lag_block)
        target_blocks.append(s.values[lag:])
        sid_blocks.append(np.full(n_rows, si, dtype=np.int32))
        time_blocks.append(times)
    if not pred_blocks:
        raise DataError("collection has no series")
    return EmbeddedMatrix(
        predictors=np.ascontiguousarray(np.vstack(pred_blocks)),
        targets=np.concatenate(target_blocks),
        series_index=np.concatenate(sid_blocks),
        target_times=np.concatenate(time_blocks).astype(np.int64),
        series_ids=collection.ids,
        column_names=_lag_column_names(lag) + covariate_column_names(specs),
        n_lags=lag,
    )


def encode_future_covariate_block(
    collection: SeriesCollection, specs, future_covariates, step: int
) -> np.ndarray:
    """Covariate columns for forecast step ``step`` (0-based), one row per series.

    ``future_covariates`` maps series id -> covariate name -> sequence
    indexed by forecast step.
    """
    if future_covariates is None:
        raise MissingFutureCovariates(step)
    rows = []
    for s in collection:
        per_series = future_covariates.get(s.id)
        if per_series is None:
            raise MissingFutureCovariates(step)
        parts = []
        for spec in specs:
            seq = per_series.get(spec.name)
            if seq is None or len(seq) <= step:
                raise MissingFutureCovariates(step)
            parts.append(encode_covariates(seq[step], spec))
        rows.append(np.concatenate(parts))
    return np.vstack(rows)


def create_test_set(
    collection: SeriesCollection, lag: int, covariate_specs=None, future_covariates=None
) -> EmbeddedMatrix:
    """One row per series holding its final ``lag`` values, target unset."""
    if lag < 1:
        raise DataError(f"lag must be >= 1, got {lag}")
    specs = tuple(covariate_specs or ())
    n = len(collection)
    if n == 0:
        raise DataError("collection has no series")
    lag_block = np.empty((n, lag))
    times = np.empty(n, dtype=np.int64)
    for si, s in enumerate(collection):
        m = len(s)
        if m < lag:
            raise SeriesTooShort(s.id, m, lag)
        for k in range(1, lag + 1):
            lag_block[si, k - 1] = s.values[m - k]
        times[si] = m
    if specs:
        block = encode_future_covariate_block(collection, specs, future_covariates, 0)
        lag_block = np.hstack([lag_block, block])
    return EmbeddedMatrix(
        predictors=np.ascontiguousarray(lag_block),
        targets=np.full(n, np.nan),
        series_index=np.arange(n, dtype=np.int32),
        target_times=times,
        series_ids=collection.ids,
        column_names=_lag_column_names(lag) + covariate_column_names(specs),
        n_lags=lag,
    )


def update_test_set(
    test: EmbeddedMatrix,
    step_forecasts: np.ndarray,
    covariate_block: np.ndarray | None = None,
    step: int | None = None,
) -> EmbeddedMatrix:
    """Shift each row's lag window by one, inserting the new forecasts at L1."""
    step_forecasts = np.asarray(step_forecasts, dtype=np.float64)
    if step_forecasts.shape != (test.n_rows,):
        raise LengthMismatch(
            f"need one forecast per test row, got {step_forecasts.shape} for {test.n_rows} rows"
        )
    lag = test.n_lags
    predictors = test.predictors.copy()
    predictors[:, 1:lag] = test.predictors[:, 0 : lag - 1]
    predictors[:, 0] = step_forecasts
    if test.n_predictors > lag:
        if covariate_block is None:
            raise MissingFutureCovariates(step if step is not None else -1)
        if covariate_block.shape != (test.n_rows, test.n_predictors - lag):
            raise DimensionMismatch("future covariate block has the wrong shape")
        predictors[:, lag:] = covariate_block
    return EmbeddedMatrix(
        predictors=np.ascontiguousarray(predictors),
        targets=test.targets.copy(),
        series_index=test.series_index.copy(),
        target_times=test.target_times + 1,
        series_ids=test.series_ids,
        column_names=test.column_names,
        n_lags=lag,
    )


@dataclass(frozen=True)
class ForecastMatrix:
    """Per-series, per-step-ahead predictions over the horizon."""

    series_ids: tuple
    values: np.ndarray  # (n_series, horizon)

    def __post_init__(self):
        self.values.flags.writeable = False

    @property
    def horizon(self) -> int:
        return self.values.shape[1]

    def for_series(self, series_id: str) -> np.ndarray:
        return self.values[self.series_ids.index(series_id)]
