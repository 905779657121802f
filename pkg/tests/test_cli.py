import csv
import io
import textwrap

import numpy as np
import pytest

from hara_learning.cli import run

MARKET = "[market]\nsigma = 0.2\nT = 1\nr = 0.02\n"


def write(tmp_path, body, name="run.ini"):
    p = tmp_path / name
    p.write_text(MARKET + textwrap.dedent(body))
    return str(p)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_portfolio_point_mass_is_myopic(tmp_path):
    cfg = write(tmp_path, "[prior]\nkind=point_mass\ntheta0=0.3\n[utility]\ngamma=-2\n[eval]\nt=0,0.5\ny=-1,1\n")
    out = tmp_path / "o.csv"
    assert run(["portfolio", "--config", cfg, "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 4
    for r in rows:
        assert float(r["pi_hat"]) == float(r["pi_myopic"])
        assert float(r["ratio"]) == 1.0


def test_portfolio_grid_has_100_rows(tmp_path):
    cfg = write(
        tmp_path,
        "[prior]\nkind=gaussian\nm=0.5\nv=0.5\n[utility]\ngamma=-1\n[eval]\nt=linspace(0,0.9,10)\ny=linspace(-2,2,10)\n",
    )
    out = tmp_path / "o.csv"
    assert run(["portfolio", "--config", cfg, "--out", str(out)]) == 0
    text = out.read_text()
    assert text.splitlines()[0] == "t,y,x,pi_hat,pi_myopic,hedging,ratio,value"
    assert len(read_csv(out)) == 100
    # 12 significant digits, dot decimal separator
    assert all("," not in v for v in text.split(",")[8:12])
    digits = [v.split("e")[0].lstrip("-").replace(".", "").lstrip("0") for v in read_csv(out)[5].values()]
    assert max(len(d) for d in digits) <= 12


def test_divergent_rows_exit_2(tmp_path):
    cfg = write(tmp_path, "[prior]\nkind=gaussian\nm=0.5\nv=0.5\n[utility]\ngamma=0.9\n")
    out = tmp_path / "o.csv"
    assert run(["portfolio", "--config", cfg, "--out", str(out)]) == 2
    assert read_csv(out)[0]["pi_hat"] == "DIVERGENT"


def test_config_error_exit_1(tmp_path, capsys):
    cfg = write(tmp_path, "[prior]\nkind=gaussian\nm=0.5\nv=0.5\nwidth=3\n")
    assert run(["portfolio", "--config", cfg]) == 1
    assert "prior.width" in capsys.readouterr().err
    assert run(["portfolio", "--config", str(tmp_path / "missing.ini")]) == 1


def test_sweep_gaussian_ratio_increasing(tmp_path):
    cfg = write(
        tmp_path,
        "[prior]\nkind=gaussian\nm=0.5\nv=0.5\n[eval]\ngammas=-4,-2,-1,-0.5,0.25,0.5\n",
    )
    out = tmp_path / "s.csv"
    assert run(["sweep", "--config", cfg, "--out", str(out)]) == 0
    ratio = np.array([float(r["ratio"]) for r in read_csv(out)])
    assert np.all(np.diff(ratio) > 0)


def test_sweep_point_mass_ratio_one(tmp_path):
    cfg = write(tmp_path, "[prior]\nkind=point_mass\ntheta0=0.4\n[eval]\ngammas=-3,-1,0.5\n")
    out = tmp_path / "s.csv"
    assert run(["sweep", "--config", cfg, "--out", str(out)]) == 0
    assert {float(r["ratio"]) for r in read_csv(out)} == {1.0}


def test_sweep_hedging_crosses_zero_at_log(tmp_path):
    cfg = write(tmp_path, "[prior]\nkind=discrete\natoms=[(0.1,0.5),(0.5,0.5)]\n[eval]\ngammas=-2,-0.5,0.25,0.5\n")
    out = tmp_path / "s.csv"
    run(["sweep", "--config", cfg, "--out", str(out)])
    rows = read_csv(out)
    assert all((float(r["hedging"]) > 0) == (float(r["gamma"]) > 0) for r in rows)


def test_sweep_requires_gammas(tmp_path):
    cfg = write(tmp_path, "[prior]\nkind=point_mass\ntheta0=0.4\n")
    assert run(["sweep", "--config", cfg]) == 1


def test_verify_two_point_passes(tmp_path, capsys):
    cfg = write(tmp_path, "[prior]\nkind=discrete\natoms=[(0.1,0.5),(0.5,0.5)]\n[eval]\nt=0,0.5\ny=-0.5,0.5\n")
    assert run(["verify", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "PASSED" in out


def test_verify_mixed_prior_detection_mode(tmp_path, capsys):
    cfg = write(tmp_path, "[prior]\nkind=discrete\natoms=[(-0.4,0.5),(0.6,0.5)]\n[eval]\nt=0,0.5\ny=-0.5,0,0.5\n")
    assert run(["verify", "--config", cfg]) == 0
    assert "DETECT" in capsys.readouterr().out


def test_verify_gaussian_oracle(tmp_path):
    cfg = write(tmp_path, "[prior]\nkind=gaussian\nm=0.5\nv=0.5\n[eval]\nt=0,0.5\ny=-1,1\n")
    out = tmp_path / "v.csv"
    assert run(["verify", "--config", cfg, "--out", str(out)]) == 0
    rows = {r["check"]: r["status"] for r in read_csv(out)}
    assert rows["gaussian oracle: pi_hat"] == "PASS"


def test_verify_failure_exit_3(tmp_path, monkeypatch):
    from hara_learning import cli
    from hara_learning.verify import Check

    monkeypatch.setattr(cli, "run_suite", lambda *a, **k: [Check("forced", False, "x")])
    cfg = write(tmp_path, "[prior]\nkind=point_mass\ntheta0=0.4\n")
    assert run(["verify", "--config", cfg]) == 3


def test_simulate_deterministic_and_paired(tmp_path):
    cfg = write(
        tmp_path,
        "[prior]\nkind=point_mass\ntheta0=0.4\n[utility]\ngamma=-1\n[sim]\nn_paths=300\nn_steps=20\n"
        f"[output]\npaths_csv={tmp_path / 'paths.csv'}\n",
    )
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["simulate", "--config", cfg, "--out", str(a), "--seed", "5"]) == 0
    assert run(["simulate", "--config", cfg, "--out", str(b), "--seed", "5"]) == 0
    assert a.read_bytes() == b.read_bytes()
    paired = [r for r in read_csv(a) if r["kind"] == "paired"][0]
    assert float(paired["mean"]) == 0.0
    assert len((tmp_path / "paths.csv").read_text().splitlines()) == 301


def test_table_format(tmp_path, capsys):
    cfg = write(tmp_path, "[prior]\nkind=point_mass\ntheta0=0.3\n[utility]\nfamily=log\n")
    assert run(["portfolio", "--config", cfg, "--format", "table"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split() == ["t", "y", "x", "pi_hat", "pi_myopic", "hedging", "ratio", "value"]
    assert set(out[1]) <= {"-", " "}
