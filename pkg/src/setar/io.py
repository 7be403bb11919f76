"""File formats: series files, long CSV, forecast CSV, covariate config.

Two series input formats are sniffed automatically:

* values file: one series per line, ``series_id:v1,v2,...,vm`` (UTF-8,
  ``.`` decimal, no thousands separators);
* long CSV: header ``series_id,timestep,value[,cov1,...]`` with 0-based
  contiguous timesteps per series.

Covariate kinds come from a small key=value config file with lines like
``cov.price.kind=numeric``. Forecast CSVs carry the header
``series_id,h1,...,hH``. All writers go through an atomic
temp-file-plus-rename so output files are never half written.
"""

from __future__ import annotations

import csv
import io as _io
import os
import tempfile

import numpy as np

from .data import ForecastMatrix, Series, SeriesCollection
from .errors import DataError

FORMAT_B_PREFIX = ("series_id", "timestep", "value")


def atomic_write(path: str, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".setar-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_float(token: str, where: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise DataError(f"{where}: cannot parse {token!r} as a number") from None


def read_covariate_config(path: str) -> dict:
    """Covariate kind declarations from key=value lines."""
    kinds = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            key, value = key.strip(), value.strip()
            if not (key.startswith("cov.") and key.endswith(".kind")):
                raise DataError(f"{path}:{lineno}: unknown key {key!r}")
            name = key[len("cov.") : -len(".kind")]
            if value not in ("numeric", "categorical"):
                raise DataError(
                    f"{path}:{lineno}: kind must be numeric or categorical, got {value!r}"
                )
            kinds[name] = value
    return kinds


def _read_values_file(text: str, path: str) -> SeriesCollection:
    series = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if ":" not in line:
            raise DataError(f"{path}:{lineno}: expected series_id:v1,v2,...")
        sid, rest = line.split(":", 1)
        values = np.array(
            [_parse_float(tok, f"{path}:{lineno}") for tok in rest.split(",") if tok != ""]
        )
        if values.size == 0:
            raise DataError(f"{path}:{lineno}: series {sid!r} has no values")
        series.append(Series(id=sid, values=values))
    if not series:
        raise DataError(f"{path}: no series found")
    return SeriesCollection(series=tuple(series))


def _read_long_csv(text: str, path: str, covariate_kinds: dict) -> SeriesCollection:
    reader = csv.reader(_io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header[:3]) != FORMAT_B_PREFIX:
        raise DataError(f"{path}: long CSV must start with header series_id,timestep,value")
    cov_names = header[3:]
    for name in covariate_kinds:
        if name not in cov_names:
            raise DataError(f"{path}: declared covariate {name!r} missing from header")
    per_series: dict[str, list] = {}
    order: list[str] = []
    for lineno, row in enumerate(reader, 2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        sid = row[0]
        if sid not in per_series:
            per_series[sid] = []
            order.append(sid)
        step = int(_parse_float(row[1], f"{path}:{lineno}"))
        per_series[sid].append((step, row))
    series = []
    for sid in order:
        rows = per_series[sid]
        rows.sort(key=lambda r: r[0])
        steps = [r[0] for r in rows]
        if steps != list(range(len(rows))):
            raise DataError(
                f"{path}: series {sid!r} timesteps must be 0-based and contiguous"
            )
        values = np.array(
            [_parse_float(r[1][2], f"{path} series {sid!r}") for r in rows]
        )
        covariates = {}
        for ci, name in enumerate(cov_names):
            raw_col = [r[1][3 + ci] for r in rows]
            if covariate_kinds.get(name) == "numeric":
                covariates[name] = np.array(
                    [_parse_float(v, f"{path} covariate {name!r}") for v in raw_col]
                )
            else:
                covariates[name] = tuple(raw_col)
        series.append(Series(id=sid, values=values, covariates=covariates))
    if not series:
        raise DataError(f"{path}: no series found")
    return SeriesCollection(series=tuple(series), covariate_kinds=dict(covariate_kinds))


def read_collection(path: str, covariate_config: str | None = None) -> SeriesCollection:
    """Load a series collection, sniffing the format from the first line."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    first = text.split("\n", 1)[0]
    kinds = read_covariate_config(covariate_config) if covariate_config else {}
    if first.startswith("series_id,"):
        return _read_long_csv(text, path, kinds)
    if ":" in first:
        if kinds:
            raise DataError("values files cannot carry covariates; use the long CSV format")
        return _read_values_file(text, path)
    raise DataError(
        f"{path}: unrecognized input (expected a values file or a long CSV header)"
    )


def collection_to_values_text(collection: SeriesCollection) -> str:
    lines = []
    for s in collection:
        lines.append(f"{s.id}:" + ",".join(repr(float(v)) for v in s.values))
    return "\n".join(lines) + "\n"


def write_collection(collection: SeriesCollection, path: str) -> None:
    atomic_write(path, collection_to_values_text(collection))


def forecasts_to_csv_text(forecasts: ForecastMatrix) -> str:
    horizon = forecasts.horizon
    lines = ["series_id," + ",".join(f"h{i + 1}" for i in range(horizon))]
    for si, sid in enumerate(forecasts.series_ids):
        lines.append(sid + "," + ",".join(repr(float(v)) for v in forecasts.values[si]))
    return "\n".join(lines) + "\n"


def write_forecasts(forecasts: ForecastMatrix, path: str) -> None:
    atomic_write(path, forecasts_to_csv_text(forecasts))


def read_forecasts(path: str) -> ForecastMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "series_id":
            raise DataError(f"{path}: expected forecast CSV header series_id,h1,...")
        horizon = len(header) - 1
        ids, rows = [], []
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != horizon + 1:
                raise DataError(f"{path}:{lineno}: expected {horizon + 1} fields")
            ids.append(row[0])
            rows.append([_parse_float(v, f"{path}:{lineno}") for v in row[1:]])
    if not ids:
        raise DataError(f"{path}: no forecast rows")
    return ForecastMatrix(series_ids=tuple(ids), values=np.array(rows))


def read_step_table(path: str) -> dict:
    """Per-series step-indexed values: forecast CSV or values-file layout.

    Used for held-out actuals; returns series id -> vector.
    """
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
    if first.startswith("series_id,"):
        matrix = read_forecasts(path)
        return {sid: matrix.values[i] for i, sid in enumerate(matrix.series_ids)}
    collection = read_collection(path)
    return {s.id: s.values for s in collection}


def read_future_covariates(path: str) -> dict:
    """Future covariate values: header series_id,timestep,cov1,...

    ``timestep`` is the 0-based forecast step. Returns
    series id -> covariate name -> list indexed by step.
    """
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header[:2]) != ("series_id", "timestep"):
            raise DataError(f"{path}: expected header series_id,timestep,cov1,...")
        names = header[2:]
        out: dict = {}
        rows = []
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields")
            rows.append((row[0], int(_parse_float(row[1], f"{path}:{lineno}")), row[2:]))
    for sid, step, values in sorted(rows, key=lambda r: (r[0], r[1])):
        series_map = out.setdefault(sid, {name: [] for name in names})
        for name, value in zip(names, values):
            if len(series_map[name]) != step:
                raise DataError(
                    f"{path}: series {sid!r} future steps must be 0-based and contiguous"
                )
            series_map[name].append(value)
    return out
