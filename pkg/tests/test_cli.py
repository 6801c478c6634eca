import json

import numpy as np
import pytest

from nsdeform import cli
from nsdeform.cli import FitBundle, main, read_dataset, read_points


@pytest.fixture
def gen2d(tmp_path):
    assert main(["gen", "--example", "2d", "--grid", "20", "--seed", "3", "--train", "150",
                 "--valid", "100", "--out", str(tmp_path / "g")]) == 0
    return tmp_path / "g"


def test_gen_outputs_and_determinism(tmp_path):
    for k in ("a", "b"):
        assert main(["gen", "--example", "1d", "--n", "300", "--seed", "7",
                     "--out", str(tmp_path / k)]) == 0
    for name in ("data.csv", "truth.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    data = read_dataset(tmp_path / "a" / "data.csv")
    assert data.n == 300 and data.dim == 1
    header = (tmp_path / "a" / "truth.csv").read_text().splitlines()[0]
    assert header == "x,fx"


def test_gen_2d_grid(tmp_path):
    assert main(["gen", "--example", "2d", "--grid", "12", "--seed", "7",
                 "--out", str(tmp_path)]) == 0
    assert read_dataset(tmp_path / "data.csv").n == 144


def test_full_precision(gen2d):
    line = (gen2d / "data.csv").read_text().splitlines()[1]
    z = line.split(",")[-1]
    digits = len(z.lstrip("-").replace(".", "").split("e")[0].lstrip("0"))
    assert digits >= 15


def test_fit_krige_diag(gen2d, tmp_path, capsys):
    out = tmp_path / "f"
    assert main(["fit", "--data", str(gen2d / "train.csv"), "--lambda", "0.5", "--omega", "0.2",
                 "--anchor-counts", "5,5", "--out", str(out)]) == 0
    for name in ("bundle.json", "deformed.csv", "stress.csv", "fold.json", "variogram.csv"):
        assert (out / name).is_file()
    bundle = FitBundle.load(out / "bundle.json")
    assert bundle.hyper.lam == 0.5 and bundle.dim == 2
    assert len(bundle.provenance["data_sha256"]) == 64

    train = read_dataset(gen2d / "train.csv")
    assert main(["krige", "--bundle", str(out / "bundle.json"), "--data", str(gen2d / "train.csv"),
                 "--targets", str(gen2d / "train.csv"), "--out", str(tmp_path / "k")]) == 0
    rows = np.loadtxt(tmp_path / "k" / "predictions.csv", delimiter=",", skiprows=1)
    if bundle.model.nugget == 0:
        np.testing.assert_allclose(rows[:, 2], train.values, atol=1e-10)

    assert main(["krige", "--bundle", str(out / "bundle.json"), "--data", str(gen2d / "train.csv"),
                 "--targets", str(gen2d / "valid.csv"), "--out", str(tmp_path / "k")]) == 0
    scores = json.loads((tmp_path / "k" / "scores.json").read_text())
    assert set(scores) == {"mae", "rmse", "nmse", "logs", "crps"}

    assert main(["diag", "--bundle", str(out / "bundle.json"), "--probes", "0.5,0.5;0.1,0.1",
                 "--radius", "0.2", "--data", str(gen2d / "train.csv"),
                 "--out", str(tmp_path / "d")]) == 0
    tab = np.loadtxt(tmp_path / "d" / "contours.csv", delimiter=",", skiprows=1)
    g0, g1 = tab[tab[:, 0] == 0, -1], tab[tab[:, 0] == 1, -1]
    assert not np.allclose(g0, g1)
    assert tab[:, -1].max() <= bundle.model.total_sill + 1e-12
    assert (tmp_path / "d" / "scatter.csv").is_file()


def test_stationary_diag_identical_tables(gen2d, tmp_path):
    assert main(["fit", "--data", str(gen2d / "train.csv"), "--stationary",
                 "--out", str(tmp_path / "s")]) == 0
    assert main(["diag", "--bundle", str(tmp_path / "s" / "bundle.json"),
                 "--probes", "0.5,0.5;0.1,0.9;0.8,0.2", "--radius", "0.3",
                 "--out", str(tmp_path / "d")]) == 0
    tab = np.loadtxt(tmp_path / "d" / "contours.csv", delimiter=",", skiprows=1)
    g = [tab[tab[:, 0] == k, -1] for k in range(3)]
    np.testing.assert_array_equal(g[0], g[1])
    np.testing.assert_array_equal(g[0], g[2])


def test_omega_zero_is_congruent(gen2d, tmp_path):
    assert main(["fit", "--data", str(gen2d / "train.csv"), "--lambda", "0.5", "--omega", "0",
                 "--anchor-counts", "5,5", "--out", str(tmp_path)]) == 0
    tab = np.loadtxt(tmp_path / "anchors.csv", delimiter=",", skiprows=1)
    from scipy.spatial.distance import pdist

    np.testing.assert_allclose(pdist(tab[:, 2:]), pdist(tab[:, :2]), atol=1e-6)


def test_fit_determinism(gen2d, tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    args = ["fit", "--data", str(gen2d / "train.csv"), "--lambda", "0.6", "--omega", "0.3",
            "--anchor-counts", "5,5", "--out"]
    assert main(args + [str(tmp_path / "a")]) == 0
    assert main(args + [str(tmp_path / "b")]) == 0
    for name in ("bundle.json", "deformed.csv", "stress.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_fit_1d_monotone(tmp_path):
    assert main(["gen", "--example", "1d", "--n", "300", "--seed", "1", "--out", str(tmp_path)]) == 0
    assert main(["fit", "--data", str(tmp_path / "data.csv"), "--lambda", "0.5", "--omega", "0.2",
                 "--out", str(tmp_path / "f")]) == 0
    tab = np.loadtxt(tmp_path / "f" / "deformed.csv", delimiter=",", skiprows=1)
    u = tab[np.argsort(tab[:, 0]), 1]
    d = np.diff(u)
    assert np.all(d > 0) or np.all(d < 0)


def test_config_file_and_override(gen2d, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(f'data = "{gen2d / "train.csv"}"\n[fit]\nlambda = 0.9\nomega = 0.1\n'
                   'anchor_counts = "4,4"\n')
    assert main(["fit", "--config", str(cfg), "--lambda", "0.5", "--out", str(tmp_path / "f")]) == 0
    b = FitBundle.load(tmp_path / "f" / "bundle.json")
    assert (b.hyper.lam, b.hyper.omega) == (0.5, 0.1)
    assert b.provenance["anchors"] == 16


def test_cv_command(gen2d, tmp_path):
    assert main(["cv", "--data", str(gen2d / "train.csv"), "--lambda-grid", "0.4:0.8:0.2",
                 "--omega-grid", "0.1,0.3", "--shortlist", "2", "--anchor-counts", "4,4",
                 "--out", str(tmp_path)]) == 0
    sel = json.loads((tmp_path / "selected.json").read_text())
    assert sel["lambda"] in (0.4, 0.6, 0.8) and sel["omega"] in (0.1, 0.3)
    assert len((tmp_path / "cv1.csv").read_text().splitlines()) == 4
    assert len((tmp_path / "cv2.csv").read_text().splitlines()) == 5


def test_simulate_check(gen2d, tmp_path):
    assert main(["fit", "--data", str(gen2d / "train.csv"), "--lambda", "0.5", "--omega", "0.2",
                 "--anchor-counts", "5,5", "--out", str(tmp_path)]) == 0
    assert main(["simulate", "--bundle", str(tmp_path / "bundle.json"),
                 "--data", str(gen2d / "train.csv"), "--targets", str(gen2d / "valid.csv"),
                 "--n-real", "2000", "--seed", "4", "--check", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "check.json").read_text())
    assert rep["conditioning_ok"] and rep["mean_ok"]
    header = (tmp_path / "realizations.csv").read_text().splitlines()[0].split(",")
    assert header[:3] == ["x", "y", "r0"] and len(header) == 2002


def test_error_exit_codes(gen2d, tmp_path, capsys):
    assert main(["krige", "--bundle", str(tmp_path / "none.json"), "--data",
                 str(gen2d / "train.csv"), "--targets", str(gen2d / "valid.csv")]) == cli.EXIT_DATA
    assert "not found" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--no-such-flag"])
    assert exc.value.code == cli.EXIT_USAGE
    assert main(["fit", "--data", str(gen2d / "train.csv"), "--lambda", "0.5"]) == cli.EXIT_USAGE
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y,z\n0,0,1\n0,0,2\n")
    assert main(["fit", "--data", str(bad), "--stationary", "--out", str(tmp_path)]) == cli.EXIT_DATA
    assert main(["fit", "--data", str(gen2d / "train.csv"), "--lambda", "0.001", "--omega", "0.5",
                 "--out", str(tmp_path)]) in (cli.EXIT_DATA, cli.EXIT_NUMERIC)


def test_grid_parsing():
    assert cli.parse_grid("0.1:0.3:0.1") == [0.1, 0.2, 0.3]
    assert cli.parse_grid("1,2.5") == [1.0, 2.5]
    with pytest.raises(cli.UsageError):
        cli.parse_grid("a:b")
