import json
import subprocess
import sys

import numpy as np
import pytest

from qrzero.cli import EXIT_CONFIG, main
from qrzero.fileio import (
    CsvError,
    FitRequest,
    chain_from_draws,
    censor_curve_rows,
    parse_csv,
    read_draws,
    read_rep_summaries,
    write_draws,
    write_rep_summaries,
)
from qrzero.model import ConfigurationError
from qrzero.sampler import Chain
from qrzero.simstudy import RepSummary


def write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def request(path, out, **kw):
    base = dict(data_path=path, response="y", x_cols=["x"], z_cols=["x"], taus=[0.5],
                out_dir=str(out), level=0.9)
    base.update(kw)
    return FitRequest(**base)


@pytest.fixture
def fit_csv(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 1, 60)
    y = np.where(rng.random(60) < 0.3, 0.0, np.maximum(0.0, 0.5 + x + rng.normal(0, 0.5, 60)))
    lines = ["y,x"] + [f"{a!r},{b!r}" for a, b in zip(y.tolist(), x.tolist())]
    return write_csv(tmp_path / "data.csv", "\n".join(lines) + "\n")


def test_parse_small_fixture(tmp_path):
    path = write_csv(tmp_path / "d.csv", "y,x,z\n0,1.5,2\n2.5,0.5,1\n1,1.0,0\n")
    data, scaling = parse_csv(path, request(path, tmp_path, z_cols=["z"]))
    np.testing.assert_array_equal(data.y, [0.0, 2.5, 1.0])
    np.testing.assert_array_equal(data.X, [[1, 1.5], [1, 0.5], [1, 1.0]])
    np.testing.assert_array_equal(data.Z, [[1, 2], [1, 1], [1, 0]])
    assert data.x_names == ["intercept", "x"] and scaling == {}


def test_parse_standardize(tmp_path):
    path = write_csv(tmp_path / "d.csv", "y,x\n0,1\n2,2\n1,3\n")
    data, scaling = parse_csv(path, request(path, tmp_path, z_cols=[], standardize=True))
    assert scaling["x"] == {"mean": 2.0, "sd": 1.0}
    np.testing.assert_allclose(data.X[:, 1], [-1, 0, 1])
    const = write_csv(tmp_path / "c.csv", "y,x\n0,1\n2,1\n1,1\n")
    with pytest.raises(CsvError, match="constant"):
        parse_csv(const, request(const, tmp_path, standardize=True))


@pytest.mark.parametrize("text,match", [
    ("y,x\n0,1\n-2,2\n", "row 2"),
    ("y,x\n0,1\nabc,2\n", "row 2"),
    ("y,x\n0,1\n1,inf\n", "non-finite"),
    ("y,w\n0,1\n", "missing column"),
    ("y,x\n", "no data rows"),
])
def test_parse_errors(tmp_path, text, match):
    path = write_csv(tmp_path / "bad.csv", text)
    with pytest.raises(CsvError, match=match):
        parse_csv(path, request(path, tmp_path))


def test_request_requires_level(tmp_path):
    with pytest.raises(ConfigurationError):
        request("d.csv", tmp_path, level=None)
    with pytest.raises(ValueError):
        request("d.csv", tmp_path, taus=[0.0])


def test_draws_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    n = 7
    chain = Chain(rng.normal(size=(n, 2)), rng.normal(size=(n, 2)), rng.gamma(2.0, size=n),
                  np.zeros((n, 0), np.int8), np.empty(0, int), np.arange(10, 10 + n),
                  0, 0, float("nan"), 0.1)
    path = tmp_path / "draws.csv"
    write_draws(path, chain)
    its, cols = read_draws(path)
    back = chain_from_draws(its, cols)
    np.testing.assert_array_equal(back.beta_draws, chain.beta_draws)
    np.testing.assert_array_equal(back.gamma_draws, chain.gamma_draws)
    np.testing.assert_array_equal(back.sigma_draws, chain.sigma_draws)
    np.testing.assert_array_equal(back.iterations, chain.iterations)
    assert path.read_text().startswith("# qrzero draws schema_version=1")


def test_rep_summaries_round_trip(tmp_path):
    reps = [RepSummary(0, 0.25, 0.6, 0.1, [0.1, 0.2], [1.0, -1.0], 0.4, 0.1, 0.3),
            RepSummary(1, 0.25, float("nan"), 0.2, [0.3, 0.4], [2.0, -2.0], 0.5, 0.0, 0.25)]
    path = tmp_path / "sim.csv"
    write_rep_summaries(path, reps)
    back = read_rep_summaries(path)
    assert back[0] == reps[0]
    assert np.isnan(back[1].zeta_c) and back[1].beta_mean == reps[1].beta_mean


def test_censor_curve_rows():
    rows = censor_curve_rows(1.0, 1.0, [0.5], [0.0, 0.5, 1.0])
    probs = [r[-1] for r in rows]
    assert probs[0] == 1.0 and probs[2] == 0.0
    assert probs[1] == pytest.approx(0.2326965376, abs=1e-9)
    with pytest.raises(ConfigurationError):
        censor_curve_rows(1.0, 1.0, [0.5], [1.5])


# -- command line -------------------------------------------------------------------

FIT_ARGS = ["--response", "y", "--x", "x", "--z", "x", "--tau", "0.25,0.75", "--level",
            "0.9", "--iters", "300", "--burnin", "100", "--seed", "3"]


def test_fit_writes_bundle(tmp_path, fit_csv):
    out = tmp_path / "out"
    assert main(["fit", fit_csv, "--out", str(out)] + FIT_ARGS) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["censor_tau0.25.csv", "censor_tau0.75.csv", "draws_tau0.25.csv",
                     "draws_tau0.75.csv", "manifest.json", "summary_tau0.25.json",
                     "summary_tau0.75.json"]
    summ = json.loads((out / "summary_tau0.25.json").read_text())
    assert summ["schema_version"] == 1 and summ["level"] == 0.9
    p = summ["parameters"]["beta_1"]
    assert p["lower"] <= p["mean"] <= p["upper"] and p["covariate"] == "x"
    draws = (out / "draws_tau0.25.csv").read_text().splitlines()
    assert len(draws) == 2 + 200


def test_fit_replay_is_byte_identical(tmp_path, fit_csv):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["fit", fit_csv, "--out", str(first)] + FIT_ARGS) == 0
    assert main(["fit", "--manifest", str(first / "manifest.json"), "--out", str(second)]) == 0
    for f in first.iterdir():
        assert f.read_bytes() == (second / f.name).read_bytes(), f.name


def test_simulate_rows_and_replay(tmp_path):
    spec = {"n": 60, "replications": 2, "iters": 120, "burnin": 40, "taus": [0.25, 0.5]}
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    out1, out2 = tmp_path / "r1" / "sim.csv", tmp_path / "r2" / "sim.csv"
    assert main(["simulate", str(spec_path), "--out", str(out1)]) == 0
    assert len(read_rep_summaries(out1)) == 4
    man = out1.with_name("sim.manifest.json")
    assert main(["simulate", str(man), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert man.read_bytes() == out2.with_name("sim.manifest.json").read_bytes()


@pytest.mark.parametrize("content", ["{not json", '{"n": "many"}', '{"bogus": 1}', "[1, 2]"])
def test_simulate_bad_spec_exit_code(tmp_path, content, capsys):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(content)
    assert main(["simulate", str(spec_path), "--out", str(tmp_path / "o.csv")]) == EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_fit_bad_input_exit_code(tmp_path, capsys):
    path = write_csv(tmp_path / "neg.csv", "y,x\n0,1\n-1,2\n3,3\n")
    assert main(["fit", path, "--out", str(tmp_path / "o")] + FIT_ARGS) == EXIT_CONFIG
    assert "row 2" in capsys.readouterr().err
    assert main(["fit", path, "--response", "y", "--tau", "0.5"]) == EXIT_CONFIG


def test_censor_curve_and_summarize(tmp_path, fit_csv, capsys):
    curve = tmp_path / "curve.csv"
    assert main(["censor-curve", "--mu", "1", "--tau", "0.5", "--p", "0.5",
                 "--out", str(curve)]) == 0
    lines = curve.read_text().splitlines()
    assert lines[0] == "mu,sigma,tau,p,f0,prob"
    assert float(lines[1].split(",")[-1]) == pytest.approx(0.2326965376, abs=1e-9)

    out = tmp_path / "fit"
    main(["fit", fit_csv, "--out", str(out)] + FIT_ARGS)
    capsys.readouterr()
    assert main(["summarize", str(out / "draws_tau0.25.csv"), "--level", "0.9"]) == 0
    rec = json.loads(capsys.readouterr().out)
    orig = json.loads((out / "summary_tau0.25.json").read_text())
    assert rec["parameters"]["sigma"] == orig["parameters"]["sigma"]


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "qrzero", "censor-curve", "--mu", "-1",
                          "--tau", "0.1,0.9", "--p", "0,1"], capture_output=True, text=True)
    assert res.returncode == 0
    assert len(res.stdout.strip().splitlines()) == 5
