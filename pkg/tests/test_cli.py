import json
import subprocess
import sys

import numpy as np
import pytest

from chainbounds import cli, harness


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gamma_two_points(tmp_path, capsys):
    f = tmp_path / "d.csv"
    np.savetxt(f, [[0, 3.5], [3.5, 0]], delimiter=",")
    code, out, _ = run(capsys, "gamma", "--distances", str(f), "--bruteforce")
    res = json.loads(out)
    assert code == 0 and res["gamma_upper"] == 3.5 == res["gamma_bruteforce"]


def test_lambda_and_decompose(tmp_path, capsys):
    code, out, _ = run(capsys, "lambda", "--m", "6", "--n", "4", "--s0", "1")
    res = json.loads(out)
    assert code == 0 and 0 < res["lambda_tilde"] and res["m"] == 6
    f = tmp_path / "z.csv"
    f.write_text("3,-1,2\n")
    code, out, err = run(capsys, "decompose", "--values", str(f), "--j", "2")
    assert code == 0
    assert out.splitlines() == ["index,value,part", "0,3.0,U", "1,-1.0,V", "2,2.0,V"]
    assert "j=2" in err


def test_projection_check(capsys):
    code, out, _ = run(capsys, "projection-check", "--m", "5", "--n", "3", "--N", "16")
    res = json.loads(out)
    assert code == 0 and res["assumption_A"] and res["assumption_B"] and res["radius_passed"]


def test_usage_and_config_errors(tmp_path, capsys):
    assert run(capsys, "frobnicate")[0] == cli.EXIT_USAGE
    assert run(capsys, "simulate", "--experiment", "multiplier")[0] == cli.EXIT_USAGE
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nexperiment = multiplier\n")
    code, _, err = run(capsys, "simulate", "--config", str(bad))
    assert code == cli.EXIT_USAGE and "seed" in err
    assert run(capsys, "simulate", "--config", str(tmp_path / "none.ini"))[0] == cli.EXIT_USAGE
    assert run(capsys, "gamma", "--distances", str(tmp_path / "none.csv"))[0] == cli.EXIT_USAGE


def test_simulate_and_report(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[experiment]\nexperiment = bernoulli\nseed = 2\nm = 4\nn = 3\nN = 10\ntrials = 2000\n")
    out_dir = tmp_path / "out"
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--out", str(out_dir))
    assert code == 0 and "in_band" in out.splitlines()[0]
    code, out, _ = run(capsys, "report", str(out_dir), "--out", str(tmp_path / "fig"))
    assert code == 0
    png = tmp_path / "fig" / "bernoulli.png"
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert (tmp_path / "fig" / "bernoulli_plot.csv").read_text().splitlines()[0] == "band_hi,band_lo,exact,level,mc,passed"


def test_report_refuses_incomplete_run(tmp_path, capsys):
    (tmp_path / "record.json").write_text(json.dumps({"complete": False}))
    (tmp_path / "trials.jsonl").write_text("")
    assert run(capsys, "report", str(tmp_path))[0] == cli.EXIT_USAGE


def test_failed_verdict_exits_2(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(harness, "dispatch", lambda cfg, threads=1: harness.Outcome([], [{"x": 1}], False))
    code, _, err = run(capsys, "simulate", "--experiment", "multiplier", "--seed", "1",
                       "--out", str(tmp_path))
    assert code == cli.EXIT_FAIL and "FAIL" in err


def test_crashed_run_exits_2(tmp_path, capsys, monkeypatch):
    def boom(cfg, threads=1):
        raise RuntimeError("interrupted")

    monkeypatch.setattr(harness, "dispatch", boom)
    code, _, _ = run(capsys, "simulate", "--experiment", "tails", "--seed", "1", "--out", str(tmp_path))
    assert code == cli.EXIT_FAIL
    assert json.loads((tmp_path / "record.json").read_text())["complete"] is False


def test_verify_deterministic_suite(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--suite", "deterministic", "--out", str(tmp_path))
    lines = out.splitlines()
    assert code == 0 and len(lines) == 3 and all(l.startswith("[PASS]") for l in lines)
    assert (tmp_path / "verify.csv").read_text().startswith("criterion,name,passed")


def test_console_script_entry_point(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("0,1\n1,0\n")
    res = subprocess.run([sys.executable, "-m", "chainbounds.cli", "gamma", "--distances", str(f)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["gamma_upper"] == 1.0
