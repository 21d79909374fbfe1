import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from fictdom.cli import EXIT_CONFIG, EXIT_OK, EXIT_PATTERN, EXIT_SINGULAR, RunConfig, main
from fictdom import cli
from fictdom.io import CONVERGENCE_HEADER, MULTIPLIER_HEADER, SOLUTION_HEADER, read_csv, write_csv


def config(tmp_path, **kw):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(kw), encoding="utf-8")
    return str(path)


def test_solve_writes_outputs(tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--config", config(tmp_path, n=16), "--out", str(out)]) == EXIT_OK
    header, rows = read_csv(out / "solution.csv")
    assert tuple(header) == SOLUTION_HEADER and len(rows) == 17 ** 2
    header, rows = read_csv(out / "multiplier.csv")
    assert tuple(header) == MULTIPLIER_HEADER and len(rows) == 32
    summary = dict(line.split(" = ") for line in (out / "summary.txt").read_text().splitlines())
    assert float(summary["err_h1"]) > 0
    assert float(summary["energy_residual"]) <= 1e-12
    assert float(summary["residual_norm"]) <= 1e-10


def test_solve_singular_exit_code(tmp_path, capsys):
    code = main(["solve", "--config", config(tmp_path, c_s=0, multiplier_space="fine"), "--out", str(tmp_path)])
    assert code == EXIT_SINGULAR
    err = capsys.readouterr().err
    assert "singular" in err and "C_s=0" in err and "fine" in err


@pytest.mark.parametrize("cfg", [dict(n=0), dict(problem_id="nope"), dict(c_s=-1), dict(multiplier_space="p1"),
                                 dict(bogus=1), dict(n=2.5), dict(kmin=3, kmax=2), dict(n_list="8")])
def test_config_errors(tmp_path, cfg):
    assert main(["solve", "--config", config(tmp_path, **cfg), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_missing_and_malformed_config(tmp_path):
    assert main(["singular-demo", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{n: 3", encoding="utf-8")
    assert main(["singular-demo", "--config", str(bad)]) == EXIT_CONFIG


def test_convergence_csv_and_svg(tmp_path, capsys):
    out = tmp_path / "conv"
    code = main(["convergence", "--config", config(tmp_path, n_list=[8, 16, 32, 64, 128]), "--out", str(out), "--svg"])
    assert code == EXIT_OK
    header, rows = read_csv(out / "convergence.csv")
    assert tuple(header) == CONVERGENCE_HEADER
    assert header == ["n", "h", "h_gamma", "err_h1", "err_l2_gamma", "fluct_norm", "energy_residual"]
    assert len(rows) == 5
    printed = capsys.readouterr().out
    slope = float(next(l for l in printed.splitlines() if l.startswith("slope_h1")).split("=")[1])
    assert 0.9 <= slope <= 1.2
    root = ET.parse(out / "convergence.svg").getroot()
    ns = "{http://www.w3.org/2000/svg}"
    assert root.tag == ns + "svg" and root.get("version") == "1.1"
    assert len(root.findall(f"{ns}polyline")) == 2
    assert len(root.findall(f"{ns}polygon")) == 1


def test_convergence_without_plot_flag(tmp_path):
    out = tmp_path / "conv"
    assert main(["convergence", "--config", config(tmp_path, n_list=[4, 8, 16]), "--out", str(out)]) == EXIT_OK
    assert not (out / "convergence.svg").exists()


def test_convergence_cs_sweep(tmp_path):
    out = tmp_path / "conv"
    cfg = config(tmp_path, n=16, n_list=[4, 8, 16], c_s_list=[0.1, 1, 10])
    assert main(["convergence", "--config", cfg, "--out", str(out)]) == EXIT_OK
    header, rows = read_csv(out / "cs_sweep.csv")
    assert header == ["c_s", "n", "err_h1", "err_l2_gamma"] and len(rows) == 3


@pytest.mark.parametrize("n_list", [[8, 16], [16, 8, 32]])
def test_convergence_rejects_bad_levels(tmp_path, n_list):
    assert main(["convergence", "--config", config(tmp_path, n_list=n_list), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_convergence_singular_exit(tmp_path):
    cfg = config(tmp_path, c_s=0, n_list=[4, 8, 16])
    assert main(["convergence", "--config", cfg, "--out", str(tmp_path)]) == EXIT_SINGULAR


@pytest.mark.parametrize("n", [16, 8])
def test_singular_demo_pattern(tmp_path, capsys, n):
    assert main(["singular-demo", "--config", config(tmp_path, n=n)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "SINGULAR" in out


def test_singular_demo_invalid_problem(tmp_path):
    assert main(["singular-demo", "--config", config(tmp_path, problem_id="circle")]) == EXIT_CONFIG


def test_singular_demo_pattern_deviation(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "EXPECTED_PATTERN", ("OK", "OK", "OK", "OK"))
    assert main(["singular-demo", "--config", config(tmp_path, n=8)]) == EXIT_PATTERN


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    values = np.concatenate([rng.standard_normal(50) * 10.0 ** rng.integers(-300, 300, 50),
                             [np.pi, 1 / 3, 5e-324, 1.7976931348623157e308, 0.1]])
    path = write_csv(tmp_path / "v.csv", ("k", "v"), ((k, v) for k, v in enumerate(values)))
    header, rows = read_csv(path)
    assert header == ["k", "v"]
    assert [r[1] for r in rows] == list(values)


def test_run_config_defaults():
    cfg = RunConfig.from_mapping({})
    assert cfg.spec().c_s == 0.1 and cfg.n_list == [8, 16, 32, 64, 128]
