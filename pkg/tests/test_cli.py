import csv
import json
from pathlib import Path

import numpy as np
import pytest

from app import main
from datamanager.dataset_loader import save_dataset
from simulation.config import build_config
from simulation.generators import gen_spatial_data

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def read_data(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))["data"]


@pytest.fixture
def fourier_csv(tmp_path, fourier_dataset):
    path = tmp_path / "fourier.csv"
    save_dataset(path, fourier_dataset)
    return path


@pytest.fixture
def spatial_csv(tmp_path):
    config = build_config({"generator": "spatial", "model": "gaussian:sill=2,range=3",
                           "N": 50, "seed": 13})
    data, _ = gen_spatial_data(config, 0)
    path = tmp_path / "spatial.csv"
    save_dataset(path, data, grid_header=True)
    return path


def band_args(csv_path, out, *extra):
    return ["band", str(csv_path), "--out", str(out), "--seed", "3", "--reps", "200", *extra]


def test_version(capsys):
    assert main(["--version"]) == 0
    assert "covband 1.0.0" in capsys.readouterr().out


def test_usage_errors(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main([]) == 2
    assert main(["band"]) == 2
    assert main(["band", "x.csv", "--knots", "many"]) == 2
    assert main(["band", "x.csv", "--domain", "3,1"]) == 2
    assert main(["--log-level", "chatty", "band", "x.csv"]) == 2


def test_fit_writes_mean_and_manifest(tmp_path, fourier_csv):
    out = tmp_path / "fit"
    assert main(["fit", str(fourier_csv), "--out", str(out), "--curves"]) == 0
    fit = read_data(out / "fit.json")
    assert fit["interior_knots"] == 3
    assert fit["N"] == 50 and fit["n"] == 40
    with open(out / "mean.csv", newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["x", "x_original", "mean"]
    assert len(rows) == 51
    assert np.loadtxt(out / "curves.csv", delimiter=",").shape == (40, 50)
    manifest = read_data(out / "manifest.json")
    assert manifest["command"] == "fit"
    assert str(fourier_csv) in manifest["inputs"]
    assert manifest["config"]["settings"]["knots"] == "formula"


def test_fit_of_constant_curves(tmp_path):
    path = tmp_path / "constant.csv"
    path.write_text("2,2,2,2,2\n2,2,2,2,2\n", encoding="utf-8")
    out = tmp_path / "out"
    assert main(["fit", str(path), "--out", str(out)]) == 0
    mean = np.loadtxt(out / "mean.csv", delimiter=",", skiprows=1)[:, 2]
    np.testing.assert_allclose(mean, 2.0, atol=1e-10)


def test_fit_records_the_header_domain(tmp_path):
    path = tmp_path / "gait.csv"
    header = ",".join(repr(float(x)) for x in np.linspace(1100, 2498, 20))
    rng = np.random.default_rng(1)
    rows = "\n".join(",".join(repr(float(v)) for v in row) for row in rng.standard_normal((6, 20)))
    path.write_text(f"{header}\n{rows}\n", encoding="utf-8")
    out = tmp_path / "out"
    assert main(["fit", str(path), "--grid-header", "--out", str(out)]) == 0
    low, high = read_data(out / "fit.json")["domain"]
    assert low == pytest.approx(1100 - 1398 / 19)
    assert high == pytest.approx(2498)


def test_band_outputs(tmp_path, fourier_csv):
    out = tmp_path / "band"
    assert main(band_args(fourier_csv, out, "--envelope", "--omega")) == 0
    band = read_data(out / "band.json")
    assert band["kappa"] >= 1
    assert len(band["h_grid"]) == 26
    simultaneous = {b["level"]: b for b in band["bands"] if b["kind"] == "simultaneous"}
    wide, narrow = simultaneous[0.99], simultaneous[0.95]
    assert all(l99 <= l95 for l99, l95 in zip(wide["lower"], narrow["lower"]))
    assert all(u99 >= u95 for u99, u95 in zip(wide["upper"], narrow["upper"]))
    pointwise = {b["level"]: b for b in band["bands"] if b["kind"] == "pointwise"}
    assert pointwise[0.95]["q"] == pytest.approx(1.959964, abs=1e-6)
    for name in ("band.csv", "envelope_95_lower.csv", "envelope_99_upper.csv", "omega.csv"):
        assert (out / name).exists()
    assert np.loadtxt(out / "omega.csv", delimiter=",").shape == (26, 26)
    assert np.loadtxt(out / "envelope_95_lower.csv", delimiter=",").shape == (26, 26)
    assert not (out / "error.json").exists()


def test_band_is_reproducible(tmp_path, fourier_csv):
    assert main(band_args(fourier_csv, tmp_path / "a")) == 0
    assert main(band_args(fourier_csv, tmp_path / "b")) == 0
    for name in ("band.json", "band.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert main(band_args(fourier_csv, tmp_path / "c")[:-2] + ["--seed", "4"]) == 0
    assert (tmp_path / "a" / "band.json").read_bytes() != (tmp_path / "c" / "band.json").read_bytes()


def test_rerun_reproduces_the_outputs(tmp_path, fourier_csv):
    out = tmp_path / "band"
    assert main(band_args(fourier_csv, out)) == 0
    original = (out / "band.json").read_bytes()
    (out / "band.json").unlink()
    assert main(["rerun", str(out / "manifest.json")]) == 0
    assert (out / "band.json").read_bytes() == original


def test_rerun_detects_changed_inputs(tmp_path, fourier_csv):
    out = tmp_path / "band"
    assert main(band_args(fourier_csv, out)) == 0
    with open(fourier_csv, "a", encoding="utf-8") as handle:
        handle.write("\n")
    assert main(["rerun", str(out / "manifest.json")]) == 3
    assert main(["rerun", str(tmp_path / "missing.json")]) == 2


@pytest.mark.parametrize("text", ["1,2,3\n4,5\n", "1,2\nx,4\n"])
def test_malformed_data_exits_with_3(tmp_path, capsys, text):
    path = tmp_path / "bad.csv"
    path.write_text(text, encoding="utf-8")
    assert main(["band", str(path), "--out", str(tmp_path / "out")]) == 3
    assert "row 2" in capsys.readouterr().err
    error = json.loads((tmp_path / "out" / "error.json").read_text(encoding="utf-8"))
    assert error["status"] == "error"
    assert error["data"]["exit_code"] == 3
    assert error["data"]["error"] == "DataError"


def test_too_many_knots_exits_with_3(tmp_path, fourier_csv):
    assert main(["fit", str(fourier_csv), "--knots", "60", "--out", str(tmp_path)]) == 3


def test_zero_curves_exit_with_4(tmp_path, capsys):
    path = tmp_path / "flat.csv"
    row = ",".join(["0"] * 30)
    path.write_text("\n".join([row] * 5) + "\n", encoding="utf-8")
    assert main(["band", str(path), "--out", str(tmp_path / "out")]) == 4
    assert "error[fpca]" in capsys.readouterr().err
    error = read_data(tmp_path / "out" / "error.json")
    assert error["stage"] == "fpca" and error["exit_code"] == 4


def test_bad_settings_exit_with_2(tmp_path, fourier_csv, capsys):
    assert main(band_args(fourier_csv, tmp_path, "--h0", "1.5", "--fve", "2")) == 2
    assert "fve" in capsys.readouterr().err


def test_goodness_of_fit(tmp_path, spatial_csv):
    out = tmp_path / "test"
    args = ["test", str(spatial_csv), "--grid-header", "--out", str(out), "--seed", "5",
            "--reps", "500", "--model", "gaussian:sill=2,range=3",
            "--model", "spherical:sill=2,range=1"]
    assert main(args) == 0
    result = read_data(out / "test.json")
    assert result["lag_range"][1] == pytest.approx(0.5 * 5.1925, abs=1e-3)
    specs = [test["model_spec"] for test in result["tests"]]
    assert specs == ["gaussian:sill=2,range=3", "spherical:sill=2,range=1"]
    for test in result["tests"]:
        assert 1 / 501 <= test["p_value"] <= 1.0
        assert set(test["decisions"]) == {"0.2", "0.1", "0.05", "0.01"}


def test_bad_model_spec_names_the_token(tmp_path, fourier_csv, capsys):
    args = ["test", str(fourier_csv), "--out", str(tmp_path), "--model", "gaussian:sill=1,rng=2"]
    assert main(args) == 2
    assert "rng=2" in capsys.readouterr().err


def test_simulate_smoke(tmp_path):
    out = tmp_path / "sim"
    args = ["simulate", "--config", str(CONFIG_DIR / "smoke.toml"), "--seed", "7",
            "--out", str(out), "--workers", "1"]
    assert main(args) == 0
    report = read_data(out / "report.json")
    assert report["reps_done"] == 1
    assert report["seed"] == 7
    with open(out / "table.csv", newline="", encoding="utf-8") as handle:
        header, row = list(csv.reader(handle))
    assert header[:4] == ["name", "N", "n", "sigma_eps"]
    assert row[0] == "smoke"
    assert "smoke" in (out / "report.md").read_text(encoding="utf-8")


def test_simulate_with_store(tmp_path):
    store = tmp_path / "replicates.sqlite"
    args = ["simulate", "--config", str(CONFIG_DIR / "smoke.toml"), "--seed", "7",
            "--store", str(store)]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == \
        (tmp_path / "b" / "report.json").read_bytes()


def test_simulate_report_does_not_depend_on_workers(tmp_path):
    args = ["simulate", "--config", str(CONFIG_DIR / "smoke.toml"), "--seed", "7", "--reps", "2"]
    assert main(args + ["--workers", "1", "--out", str(tmp_path / "serial")]) == 0
    assert main(args + ["--workers", "2", "--out", str(tmp_path / "pool")]) == 0
    for name in ("report.json", "table.csv", "report.md"):
        assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "pool" / name).read_bytes()
    assert "workers" not in read_data(tmp_path / "serial" / "report.json")["config"]


def test_simulate_needs_a_seed(tmp_path, capsys):
    args = ["simulate", "--config", str(CONFIG_DIR / "smoke.toml"), "--out", str(tmp_path)]
    assert main(args) == 2
    assert "seed" in capsys.readouterr().err
