import json
import os

import numpy as np
import pytest

from setar.cli import main
from setar.data import ForecastMatrix
from setar.errors import DataError
from setar.io import (
    atomic_write,
    collection_to_values_text,
    forecasts_to_csv_text,
    read_collection,
    read_covariate_config,
    read_forecasts,
    read_future_covariates,
    read_step_table,
    write_collection,
    write_forecasts,
)
from setar.serialize import load_model, save_model, tree_to_text
from setar.simulate import Setar2Config, gen_setar2


def test_values_file_round_trip(tmp_path):
    coll = gen_setar2(Setar2Config(n_series=4, length=30, seed=3))
    path = tmp_path / "series.txt"
    write_collection(coll, str(path))
    loaded = read_collection(str(path))
    assert loaded.ids == coll.ids
    for a, b in zip(coll, loaded):
        assert np.array_equal(a.values, b.values)  # repr round-trips doubles


def test_values_file_errors(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("s1:1,2,notanumber\n")
    with pytest.raises(DataError):
        read_collection(str(path))
    path.write_text("")
    with pytest.raises(DataError):
        read_collection(str(path))
    path.write_text("no separators here\n")
    with pytest.raises(DataError):
        read_collection(str(path))


def test_long_csv_with_covariates(tmp_path):
    csv_path = tmp_path / "long.csv"
    csv_path.write_text(
        "series_id,timestep,value,price,day\n"
        "a,0,1.0,10.5,Mon\n"
        "a,1,2.0,11.5,Tue\n"
        "a,2,3.0,12.5,Wed\n"
        "b,0,5.0,20.0,Tue\n"
        "b,1,6.0,21.0,Wed\n"
    )
    config_path = tmp_path / "covs.conf"
    config_path.write_text(
        "# kinds\ncov.price.kind=numeric\ncov.day.kind=categorical\n"
    )
    coll = read_collection(str(csv_path), str(config_path))
    assert coll.ids == ("a", "b")
    assert coll.series[0].values.tolist() == [1.0, 2.0, 3.0]
    assert coll.series[0].covariates["price"].tolist() == [10.5, 11.5, 12.5]
    assert coll.series[1].covariates["day"] == ("Tue", "Wed")
    assert coll.covariate_kinds == {"price": "numeric", "day": "categorical"}


def test_long_csv_errors(tmp_path):
    path = tmp_path / "long.csv"
    path.write_text("series_id,timestep,value\na,0,1.0\na,2,2.0\n")
    with pytest.raises(DataError):
        read_collection(str(path))  # timestep gap
    path.write_text("wrong,header,here\na,0,1.0\n")
    with pytest.raises(DataError):
        read_collection(str(path))
    path.write_text("series_id,timestep,value\na,0\n")
    with pytest.raises(DataError):
        read_collection(str(path))


def test_covariate_config_errors(tmp_path):
    path = tmp_path / "covs.conf"
    path.write_text("cov.x.kind=sideways\n")
    with pytest.raises(DataError):
        read_covariate_config(str(path))
    path.write_text("price=numeric\n")
    with pytest.raises(DataError):
        read_covariate_config(str(path))
    path.write_text("just nonsense\n")
    with pytest.raises(DataError):
        read_covariate_config(str(path))


def test_values_file_refuses_covariate_config(tmp_path):
    data = tmp_path / "series.txt"
    data.write_text("s1:1,2,3\n")
    conf = tmp_path / "covs.conf"
    conf.write_text("cov.price.kind=numeric\n")
    with pytest.raises(DataError):
        read_collection(str(data), str(conf))


def test_forecast_csv_round_trip(tmp_path):
    fm = ForecastMatrix(
        series_ids=("a", "b"),
        values=np.array([[0.1, 0.25, 1 / 3], [12345.6789, 1e-8, 2.0]]),
    )
    path = tmp_path / "fc.csv"
    write_forecasts(fm, str(path))
    text = path.read_text()
    assert text.startswith("series_id,h1,h2,h3\n")
    loaded = read_forecasts(str(path))
    assert loaded.series_ids == fm.series_ids
    assert np.array_equal(loaded.values, fm.values)


def test_step_table_accepts_both_layouts(tmp_path):
    csv_path = tmp_path / "actuals.csv"
    csv_path.write_text("series_id,h1,h2\na,1.0,2.0\n")
    values_path = tmp_path / "actuals.txt"
    values_path.write_text("a:1.0,2.0\n")
    assert read_step_table(str(csv_path))["a"].tolist() == [1.0, 2.0]
    assert read_step_table(str(values_path))["a"].tolist() == [1.0, 2.0]


def test_future_covariates_reader(tmp_path):
    path = tmp_path / "future.csv"
    path.write_text(
        "series_id,timestep,price,day\n"
        "a,0,10.0,Mon\n"
        "a,1,11.0,Tue\n"
        "b,0,20.0,Wed\n"
    )
    future = read_future_covariates(str(path))
    assert future["a"]["price"] == ["10.0", "11.0"]
    assert future["b"]["day"] == ["Wed"]
    path.write_text("series_id,timestep,price\na,1,10.0\n")
    with pytest.raises(DataError):
        read_future_covariates(str(path))


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "out.txt"
    atomic_write(str(target), "payload")
    assert target.read_text() == "payload"
    assert os.listdir(tmp_path) == ["out.txt"]


def run_cli(*argv):
    return main(list(argv))


def test_cli_simulate_train_forecast_evaluate(tmp_path):
    data = tmp_path / "data.txt"
    assert run_cli("simulate", "--kind", "setar2", "--n", "5", "--length", "120",
                   "--seed", "3", "--out", str(data)) == 0
    full = read_collection(str(data))
    train_file = tmp_path / "train.txt"
    actuals_file = tmp_path / "actuals.csv"
    from setar.data import Series, SeriesCollection

    write_collection(
        SeriesCollection(
            series=tuple(Series(id=s.id, values=s.values[:-8].copy()) for s in full)
        ),
        str(train_file),
    )
    actuals = ForecastMatrix(
        series_ids=full.ids, values=np.array([s.values[-8:] for s in full])
    )
    atomic_write(str(actuals_file), forecasts_to_csv_text(actuals))

    model_file = tmp_path / "tree.model"
    assert run_cli("train", "--input", str(train_file), "--lag", "3",
                   "--model-out", str(model_file)) == 0
    fc_file = tmp_path / "fc.csv"
    assert run_cli("forecast", "--model", str(model_file), "--input", str(train_file),
                   "--horizon", "8", "--out", str(fc_file)) == 0
    report_file = tmp_path / "eval.json"
    assert run_cli("evaluate", "--forecasts", str(fc_file), "--actuals", str(actuals_file),
                   "--training", str(train_file), "--seasonality", "1",
                   "--out", str(report_file)) == 0
    report = json.loads(report_file.read_text())
    assert set(report["aggregates"]) == {
        "mean_msmape", "median_msmape", "mean_mase", "median_mase",
    }
    assert len(report["per_series"]) == 5


def test_cli_run_is_reproducible_across_threads(tmp_path):
    data = tmp_path / "data.txt"
    run_cli("simulate", "--kind", "setar2", "--n", "6", "--length", "150",
            "--seed", "9", "--out", str(data))
    out1 = tmp_path / "fc1.csv"
    out2 = tmp_path / "fc2.csv"
    out3 = tmp_path / "fc3.csv"
    base = ["run", "--input", str(data), "--horizon", "8", "--model", "forest",
            "--trees", "3", "--seed", "4", "--lag", "2"]
    assert run_cli(*base, "--threads", "1", "--forecasts-out", str(out1)) == 0
    assert run_cli(*base, "--threads", "1", "--forecasts-out", str(out2)) == 0
    assert run_cli(*base, "--threads", "3", "--forecasts-out", str(out3)) == 0
    assert out1.read_bytes() == out2.read_bytes() == out3.read_bytes()


def test_cli_baseline_equals_depth_zero_tree(tmp_path):
    data = tmp_path / "data.txt"
    run_cli("simulate", "--kind", "setar2", "--n", "5", "--length", "120",
            "--seed", "5", "--out", str(data))
    fc_baseline = tmp_path / "fc_pr.csv"
    fc_depth0 = tmp_path / "fc_d0.csv"
    rep_baseline = tmp_path / "rep_pr.json"
    rep_depth0 = tmp_path / "rep_d0.json"
    assert run_cli("run", "--input", str(data), "--horizon", "8", "--lag", "2",
                   "--baseline", "pr", "--forecasts-out", str(fc_baseline),
                   "--report-out", str(rep_baseline), "--threads", "1") == 0
    assert run_cli("run", "--input", str(data), "--horizon", "8", "--lag", "2",
                   "--max-depth", "0", "--forecasts-out", str(fc_depth0),
                   "--report-out", str(rep_depth0), "--threads", "1") == 0
    assert fc_baseline.read_bytes() == fc_depth0.read_bytes()
    a = json.loads(rep_baseline.read_text())["metrics"]
    b = json.loads(rep_depth0.read_text())["metrics"]
    assert a == b


def test_cli_lag_heuristic_default(tmp_path, capsys):
    data = tmp_path / "data.txt"
    run_cli("simulate", "--kind", "setar2", "--n", "4", "--length", "80",
            "--seed", "2", "--out", str(data))
    report = tmp_path / "report.json"
    assert run_cli("run", "--input", str(data), "--horizon", "8",
                   "--forecasts-out", str(tmp_path / "fc.csv"),
                   "--report-out", str(report), "--threads", "1") == 0
    config = json.loads(report.read_text())["config"]
    assert config["lag"] == 10  # horizon 8 -> 10 lags
    capsys.readouterr()


def test_cli_error_exit_codes(tmp_path, capsys):
    # data error: missing input file
    assert run_cli("train", "--input", str(tmp_path / "nope.txt"), "--lag", "2",
                   "--model-out", str(tmp_path / "m.model")) == 3
    err = capsys.readouterr().err
    assert err.startswith("error:")
    # data error: series too short for the lag
    data = tmp_path / "tiny.txt"
    data.write_text("s1:1,2\n")
    assert run_cli("train", "--input", str(data), "--lag", "5",
                   "--model-out", str(tmp_path / "m.model")) == 3
    # usage error: argparse exits with code 2
    with pytest.raises(SystemExit) as exc:
        run_cli("train", "--lag", "2")
    assert exc.value.code == 2


def test_cli_train_report(tmp_path):
    data = tmp_path / "data.txt"
    run_cli("simulate", "--kind", "setar2", "--n", "5", "--length", "150",
            "--seed", "8", "--out", str(data))
    model_file = tmp_path / "tree.model"
    report_file = tmp_path / "train.json"
    assert run_cli("train", "--input", str(data), "--lag", "2",
                   "--model-out", str(model_file),
                   "--report-out", str(report_file)) == 0
    report = json.loads(report_file.read_text())
    assert report["model"]["kind"] == "tree"
    assert report["config"]["lag"] == 2
    assert "train" in report["timing_ms"]
    # saved model reloads to the identical text
    model = load_model(str(model_file))
    save_model(model, str(tmp_path / "again.model"))
    assert (tmp_path / "again.model").read_text() == model_file.read_text()
    assert tree_to_text(model) == model_file.read_text()


def test_cli_forest_model_file_round_trip(tmp_path):
    data = tmp_path / "data.txt"
    run_cli("simulate", "--kind", "setar2", "--n", "5", "--length", "120",
            "--seed", "6", "--out", str(data))
    model_file = tmp_path / "forest.model"
    assert run_cli("train-forest", "--input", str(data), "--lag", "2",
                   "--trees", "3", "--seed", "2", "--threads", "1",
                   "--model-out", str(model_file)) == 0
    forest = load_model(str(model_file))
    assert len(forest.members) == 3
    fc_file = tmp_path / "fc.csv"
    assert run_cli("forecast", "--model", str(model_file), "--input", str(data),
                   "--horizon", "4", "--out", str(fc_file), "--threads", "1") == 0
    loaded = read_forecasts(str(fc_file))
    assert loaded.values.shape == (5, 4)
