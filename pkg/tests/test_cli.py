import csv
import io
import math

import pytest

from painleve2.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_connect_fig1(capsys):
    code, out, _ = run(["connect", "--eps", "1", "--alpha1", "0.9", "--alpha2", "0.8",
                        "--phi1", "1.5707963", "--phi2", "1.0471976"], capsys)
    assert code == 0
    (row,) = rows(out)
    assert row["sigma"] == "-1"
    # 17 significant digits
    assert len(row["I1"].replace("0.", "").lstrip("0")) >= 16


def test_connect_invalid_eps(capsys):
    code, _, err = run(["connect", "--eps", "-1"], capsys)
    assert code == 2
    assert "eps must be > 0" in err


def test_unknown_flag(capsys):
    code, _, err = run(["connect", "--eps", "1", "--frobnicate"], capsys)
    assert code == 2 and "usage" in err


def test_singular_input_exit_3(capsys):
    code, _, err = run(["connect", "--eps", "1", "--alpha1", "0"], capsys)
    assert code == 3 and "numerical failure" in err


def test_c1(capsys):
    code, out, _ = run(["c1", "--resolution", "4096"], capsys)
    assert code == 0
    assert float(rows(out)[0]["c1"]) == pytest.approx(1.166, abs=1e-3)


def test_degrees_and_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# fig 1 inputs\neps = 1\nalpha1 = 0.9\n--phi2 = 60\n")
    code, out_deg, _ = run(["--config", str(cfg), "--degrees", "connect", "--phi1", "90"], capsys)
    assert code == 0
    code, out_rad, _ = run(["connect", "--eps", "1", "--phi1", repr(math.pi / 2),
                            "--phi2", repr(math.pi / 3)], capsys)
    assert rows(out_deg)[0]["I1"][:12] == rows(out_rad)[0]["I1"][:12]
    # flags override the file
    code, out, _ = run(["--config", str(cfg), "connect", "--eps", "2"], capsys)
    assert rows(out)[0]["eps"] == "2"
    cfg.write_text("colour = blue\n")
    code, _, err = run(["--config", str(cfg), "connect", "--eps", "1"], capsys)
    assert code == 2 and "colour" in err


def test_threads_env(monkeypatch, capsys):
    monkeypatch.setenv("PAINLEVE_THREADS", "0")
    code, _, _ = run(["scan", "--sweep", "eps", "--lo", "1", "--hi", "2", "--points", "2"], capsys)
    assert code == 2
    monkeypatch.setenv("PAINLEVE_THREADS", "2")
    code, out, _ = run(["scan", "--sweep", "eps", "--lo", "1", "--hi", "2", "--points", "2"], capsys)
    assert code == 0 and len(rows(out)) == 2


def test_simulate_fit_lax_chain(tmp_path, capsys):
    traj = tmp_path / "traj.csv"
    code, out, _ = run(["simulate", "--eps", "1", "--x0", "-300", "--x1", "300",
                        "--output", str(traj)], capsys)
    assert code == 0 and out == ""
    code, out, _ = run(["fit", "--eps", "1", "--input", str(traj)], capsys)
    assert code == 0
    assert rows(out)[0]["sigma"] == "-1"
    code, out, _ = run(["lax-check", "--eps", "1", "--input", str(traj)], capsys)
    assert code == 0 and float(rows(out)[0]["max_frobenius"]) < 1e-8
    code, _, _ = run(["fit", "--eps", "1", "--input", str(tmp_path / "missing.csv")], capsys)
    assert code == 2


def test_spectrum_and_average(capsys):
    code, out, _ = run(["spectrum", "--x", "10", "--eps", "1.2", "--phi1", "0", "--phi2", "0",
                        "--shift", "positive-x", "--points", "11"], capsys)
    assert code == 0
    assert list(rows(out)[0]) == ["t", "lambda1", "lambda2", "lambda3"]
    code, out, _ = run(["average", "--action", "1e-3", "--samples", "20000"], capsys)
    assert code == 0 and rows(out)[0]["method"] == "monte_carlo"
    code, _, _ = run(["average", "--action", "0.5"], capsys)
    assert code == 2
