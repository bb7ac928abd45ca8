import csv
import json
import math

import pytest

from gapforge.cli import main


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def load(tmp_path):
    return json.loads((tmp_path / "report.json").read_text())


def test_horoconvex_sweep_rows_positive(tmp_path):
    assert run(tmp_path, "horoconvex-bound", "--dims", "2..5", "--diams", "0.5,1,2,4") == 0
    with open(tmp_path / "horoconvex_bound.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 16
    assert all(r["positive"] == "true" and math.isfinite(float(r["log_bound"])) for r in rows)
    assert (tmp_path / "horoconvex_bound.dat").exists() and (tmp_path / "horoconvex_bound.plt").exists()
    rep = load(tmp_path)
    assert rep["config"]["dims"] == [2, 3, 4, 5] and rep["config"]["n"] == 500


def test_model1d_gap_is_three(tmp_path):
    assert run(tmp_path, "model1d", "--rho", "const:1", "--V", "const:0", "--D", "3.14159265") == 0
    assert load(tmp_path)["results"]["gap"] == pytest.approx(3.0, abs=1e-6)


def test_appendix_collapse_decreasing(tmp_path):
    assert run(tmp_path, "appendix-collapse", "--L", "0.8", "--r", "0.2,0.1,0.05") == 0
    with open(tmp_path / "appendix_collapse.csv") as fh:
        logs = [float(r["log_gap"]) for r in csv.DictReader(fh)]
    assert logs[0] > logs[1] > logs[2]


def test_verify_trig(tmp_path, capsys):
    assert run(tmp_path, "verify", "--suite", "trig") == 0
    assert "[PASS] trig-identities" in capsys.readouterr().out
    assert load(tmp_path)["results"]["failed"] == 0


def test_verify_sde_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["verify", "--suite", "sde", "--seed", "42", "--out", str(a)])
    main(["verify", "--suite", "sde", "--seed", "42", "--out", str(b)])
    assert load(a)["results"] == load(b)["results"]
    assert (a / "verify.csv").read_bytes() == (b / "verify.csv").read_bytes()


def test_byte_identical_outputs(tmp_path):
    for d in ("a", "b"):
        main(["two-point-check", "--pairs", "10", "--seed", "3", "--out", str(tmp_path / "x")])
        (tmp_path / "x").rename(tmp_path / d)
    for name in ("report.json", "two_point.csv", "two_point.dat", "two_point.plt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("rho = quadratic:1.0,1.0\nD = 2.0\nn = 200\n")
    out = tmp_path / "o"
    assert main(["model1d", "--config", str(cfg), "--D", "1.5", "--out", str(out)]) == 0
    conf = load(out)["config"]
    assert conf["D"] == 1.5 and conf["rho"] == "quadratic:1.0,1.0" and conf["n"] == 200


def test_errors_exit_one(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("dims = 2\nwhatever = 1\n")
    assert main(["horoconvex-bound", "--config", str(cfg)]) == 1
    assert "bad.cfg:2" in capsys.readouterr().err
    assert run(tmp_path, "model1d", "--D", "abc") == 1
    assert run(tmp_path, "verify", "--suite", "nope") == 1
    assert run(tmp_path, "bound", "--pipeline", "sphere", "--factor", "poincare") == 1


def test_failed_flags_exit_two(tmp_path):
    # a cap too large for the small-horoconvex side conditions: no admissible radius
    code = run(tmp_path, "bound", "--pipeline", "sphere", "--small-horoconvex", "true",
               "--domain", "ball:0,0;0.2", "--chart", "sphere-stereographic")
    assert code == 2
    assert load(tmp_path)["results"]["positive"] is False


@pytest.mark.parametrize("argv", [
    ["bound"],
    ["bound", "--pipeline", "s1xsn", "--domain", "ball:2,0;0.5", "--chart", "euclidean"],
    ["bound", "--pipeline", "sphere", "--factor", "flat:1", "--domain", "ball:0,0;0.3",
     "--chart", "sphere-stereographic"],
    ["pde-gap", "--h", "0.0625"],
    ["two-point-check", "--space", "sphere", "--N", "3", "--pairs", "10"],
    ["sde-couple", "--scenario", "square", "--M", "500"],
    ["sde-couple", "--scenario", "gaussian", "--M", "4000"],
    ["sde-couple", "--scenario", "sphere-cap", "--M", "4000", "--alpha", "1"],
])
def test_subcommands_succeed(tmp_path, argv):
    assert run(tmp_path, *argv) == 0
    files = {p.suffix for p in tmp_path.iterdir()}
    assert {".json", ".csv", ".dat", ".plt"} <= files
