import json

import numpy as np
import pytest

from robust_lsq.cli import main
from robust_lsq.data_io import load_dataset
from robust_lsq.experiment import read_rows


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "exp.cfg"
    p.write_text("p = 4\nn = 80\nm = 5\ngamma = 0.2\nsigma = 0.05\nseed = 3\nrepeats = 2\n"
                 "capacity = 3\nthreads = 1\n")
    return p


def test_gen_fit_eval_round_trip(tmp_path, cfg):
    data, res, est = tmp_path / "d.rlsq", tmp_path / "fit.csv", tmp_path / "beta.json"
    assert main(["gen", "--config", str(cfg), "--out", str(data)]) == 0
    ds = load_dataset(data)
    assert len(ds.batches) == 5 and ds.spec.gamma == 0.2

    assert main(["fit", "--algo", "drlr", "--data", str(data), "--out", str(res),
                 "--save-estimate", str(est)]) == 0
    rows = read_rows(res)
    assert {r.metric for r in rows} >= {"l2_error", "fit_seconds"}
    beta = json.loads(est.read_text())["beta"]
    err = np.linalg.norm(np.array(beta) - ds.truth.beta_star)
    assert err < 0.05

    out = tmp_path / "eval.csv"
    assert main(["eval", "--estimate", str(est), "--data", str(data), "--out", str(out)]) == 0
    ev = {r.metric: r.value for r in read_rows(out) if r.run == "0"}
    assert ev["l2_error"] == pytest.approx(err, rel=1e-12)


def test_sweep_overrides_and_determinism(tmp_path, cfg):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--config", str(cfg), "--corruption-ratio", "0.1,0.3", "--batches", "3,5"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--threads", "2"]) == 0
    keep = lambda p: [ln for ln in p.read_text().splitlines() if ",fit_seconds," not in ln]  # noqa: E731
    assert keep(a) == keep(b)
    rows = read_rows(a)
    assert {r.gamma for r in rows} == {0.1, 0.3} and {r.m for r in rows} == {3, 5}


def test_fit_on_csv(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.standard_normal((400, 2))
    y = 3.0 + x @ [1.0, -2.0] + 0.1 * rng.standard_normal(400)
    src = tmp_path / "t.csv"
    src.write_text("a,b,y\n" + "".join(f"{u},{v},{w}\n" for (u, v), w in zip(x, y)))
    schema = tmp_path / "s.cfg"
    schema.write_text("target = y\nfeatures = a, b\nadd_intercept = true\n")
    out = tmp_path / "o.csv"
    assert main(["fit", "--algo", "orlr", "--csv", str(src), "--schema", str(schema),
                 "--corruption-ratio", "0.3", "--batch-size", "20", "--out", str(out)]) == 0
    maes = [r.value for r in read_rows(out) if r.metric == "mae" and r.run == "0"]
    assert maes and maes[0] < 0.2


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--algo", "lasso", "--out", "x"])
    assert exc.value.code == 1
    assert "invalid choice" in capsys.readouterr().err


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("gamma = 0.7\n")
    assert main(["sweep", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert "configuration error" in capsys.readouterr().err


def test_data_error_exit_code(tmp_path, capsys):
    junk = tmp_path / "junk.rlsq"
    junk.write_bytes(b"not a dataset at all" * 10)
    assert main(["fit", "--algo", "drlr", "--data", str(junk), "--out", str(tmp_path / "o")]) == 2
    assert "data error" in capsys.readouterr().err


def test_numerical_error_exit_code(tmp_path):
    from robust_lsq.batch_model import MiniBatch
    from robust_lsq.data_io import save_dataset
    x = np.zeros((2, 10))
    x[0] = 1.0
    path = tmp_path / "sing.rlsq"
    save_dataset(path, [MiniBatch(x, np.ones(10), i) for i in range(3)])
    assert main(["fit", "--algo", "ols-avg", "--data", str(path),
                 "--out", str(tmp_path / "o")]) == 3
