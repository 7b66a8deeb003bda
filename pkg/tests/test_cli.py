import json
import math

import numpy as np
import pytest

from ssbm.cli import ingest, main, transform
from ssbm.errors import InputError
from ssbm.subsample import BmCurve


def _write(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(str(v) for v in r) + "\n")
    return str(path)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


@pytest.fixture(scope="module")
def pareto_csv(tmp_path_factory):
    N = 50000
    q = np.arange(1, N + 1) / (N + 1.0)
    y = (1.0 - q) ** -0.5 / 0.5
    path = tmp_path_factory.mktemp("data") / "pareto.csv"
    return _write(path, ["t", "y"], ((i, repr(float(v))) for i, v in enumerate(y)))


@pytest.fixture(scope="module")
def pairs_csv(tmp_path_factory):
    x = np.random.default_rng(17).exponential(size=10000)
    path = tmp_path_factory.mktemp("data") / "pairs.csv"
    return _write(path, ["x"], ((repr(float(v)),) for v in np.repeat(x, 2)))


def test_ingest_drops_unparseable(tmp_path):
    path = _write(tmp_path / "a.csv", ["t", "v"], [(1, 1.5), (2, "n/a"), (3, ""), (4, "2.5"), (5, "nan")])
    series, info = ingest(path, "v")
    assert list(series) == [1.5, 2.5]
    assert info["dropped"] == 3 and info["rows"] == 5


def test_ingest_sorts_by_timestamp(tmp_path):
    path = _write(tmp_path / "b.csv", ["when", "v"],
                  [("2024-01-03", 3.0), ("2024-01-01", 1.0), ("2024-01-02", 2.0)])
    series, info = ingest(path, "v", "when")
    assert list(series) == [1.0, 2.0, 3.0]
    assert info["resorted"]


def test_ingest_errors(tmp_path):
    path = _write(tmp_path / "c.csv", ["v"], [("x",), ("y",)])
    with pytest.raises(InputError):
        ingest(path, "w")
    with pytest.raises(InputError):
        ingest(path, "v")
    with pytest.raises(InputError):
        ingest(tmp_path / "missing.csv", "v")
    bad = _write(tmp_path / "d.csv", ["t", "v"], [("soon", 1.0)])
    with pytest.raises(InputError):
        ingest(bad, "v", "t")


def test_transforms():
    y = np.array([1.0, math.e, math.e ** 2])
    assert np.allclose(transform(y, "log")[0], [0, 1, 2])
    assert np.allclose(transform(y, "logloss")[0], [2, 1, 0])
    assert np.array_equal(transform(y, "identity")[0], y)
    with pytest.raises(InputError):
        transform(np.array([0.0, 1.0]), "log")
    with pytest.raises(InputError):
        transform(y, "sqrt")


def test_closed_form(capsys):
    code, rep = _run(capsys, ["closed-form", "--model", "exponential", "--param", "1", "--n", "100",
                              "--what", "mpmr"])
    assert code == 0
    assert rep["value"] == pytest.approx(math.log(100), abs=1e-12)
    code, rep = _run(capsys, ["closed-form", "--model", "pareto", "--xi", "0.25", "--n", "100",
                              "--what", "emr"])
    assert rep["value"] == pytest.approx(15.514957752409432, rel=1e-11)
    code, rep = _run(capsys, ["closed-form", "--model", "exponential", "--param", "1", "--n", "1e12",
                              "--what", "cdf-offset:0"])
    assert rep["value"] == pytest.approx(math.exp(-1), rel=1e-9)


def test_closed_form_nonexistent_moment_exit_3(capsys):
    code, rep = _run(capsys, ["closed-form", "--model", "pareto", "--xi", "1.5", "--n", "10", "--what", "emr"])
    assert code == 3
    assert rep["error"]["type"] == "NonexistenceError"
    assert rep["error"]["stage"] == "closed_form"


def test_evi_pareto_fixture(capsys, pareto_csv, tmp_path):
    argv = ["evi", "--input", pareto_csv, "--column", "y", "--transform", "log", "--output", "json",
            "--n-extrapolate", "100,1000", "--ei-theta", "0.5"]
    code, rep = _run(capsys, argv)
    assert code == 0
    assert 0.4 <= rep["evi"]["emr_wlse"]["xi_hat"] <= 0.6
    assert 0.4 <= rep["evi"]["mpmr_wlse"]["xi_hat"] <= 0.6
    assert rep["plateau"]["diagnostic"] in {"plateau_found", "clipped_at_boundary"}
    level = rep["risk"]["levels"][0]
    assert level["reserve"] == pytest.approx(level["mpmr"] / 0.5)
    assert [o["k"] for o in level["offsets"]] == [0, 1, 2]

    # deterministic output
    code2, rep2 = _run(capsys, argv)
    assert rep2 == rep

    out = tmp_path / "out"
    code, _ = _run(capsys, argv[:-6] + ["--output", "csv-dir", "--out-dir", str(out)])
    assert code == 0
    curve = BmCurve.from_csv(out / "bm_curve.csv")
    assert len(curve) == rep["bm_curve"]["points"]
    assert json.loads((out / "report.json").read_text())["evi"] == rep["evi"]


def test_evi_bad_theta_exit_2(capsys, pareto_csv):
    code, rep = _run(capsys, ["evi", "--input", pareto_csv, "--column", "y", "--transform", "log",
                              "--output", "json", "--ei-theta", "1.5"])
    assert code == 2
    assert rep["error"]["type"] == "InputError"


def test_evi_missing_column_exit_2(capsys, pareto_csv):
    code, rep = _run(capsys, ["evi", "--input", pareto_csv, "--column", "z", "--transform", "log",
                              "--output", "json"])
    assert code == 2
    assert rep["error"]["stage"] == "ingest"


def test_ei_pairs_fixture(capsys, pairs_csv, tmp_path):
    code, rep = _run(capsys, ["ei", "--input", pairs_csv, "--column", "x", "--out-dir", str(tmp_path)])
    assert code == 0
    assert rep["marginal"] == {"kind": "ecdf"}
    assert 0.35 <= rep["ei"]["selected_theta"] <= 0.65
    assert rep["ei"]["sojourn_time"] == pytest.approx(1 / rep["ei"]["selected_theta"])
    lines = (tmp_path / "ei_curve.csv").read_text().splitlines()
    assert lines[0] == "n,theta_hat,z_sd"
    assert len(lines) - 1 == len(rep["curve"])


def test_ei_fitted_marginal(capsys, pairs_csv):
    code, rep = _run(capsys, ["ei", "--input", pairs_csv, "--column", "x", "--marginal", "exponential",
                              "--variant", "northrop", "--grid", "geometric:8"])
    assert code == 0
    assert rep["marginal"]["kind"] == "exponential"
    assert rep["marginal"]["param"] == pytest.approx(1.0, rel=0.05)
    assert rep["ei"]["variant"] == "northrop"
    assert 0.0 < rep["ei"]["selected_theta"] <= 1.0


def test_simulate_csv_stdout(capsys):
    code, out = _run(capsys, ["simulate", "--phi", "0", "--xi", "1", "--replicates", "2", "--length", "100",
                              "--output", "csv"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "phi,xi,method,mape,failures,replicates"
    assert len(lines) == 7


def test_bad_grid_exit_2(capsys, pairs_csv):
    code, rep = _run(capsys, ["ei", "--input", pairs_csv, "--column", "x", "--grid", "linear:4"])
    assert code == 2
