import json
import subprocess
import sys

import pytest

from kacsim.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_writes_outputs(tmp_path, capsys):
    code, out, err = run(capsys, "simulate", "--nu", "0.5", "--n", "200", "--replicas", "2", "--out", str(tmp_path))
    assert code == 0 and err == ""
    assert {p.split("/")[-1] for p in out.split()} == {"records.csv", "summary.csv", "manifest.json"}
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["config"]["n"] == 200 and man["runtime"]["command"] == "simulate"


def test_config_file_and_flag_precedence(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("nu = 0.5\nn = 100\nreplicas = 3\n")
    code, _, _ = run(capsys, "simulate", "--config", str(conf), "--n", "150", "--seed", "9", "--out", str(tmp_path / "o"))
    assert code == 0
    cfg = json.loads((tmp_path / "o" / "manifest.json").read_text())["config"]
    assert (cfg["n"], cfg["replicas"], cfg["base_seed"]) == (150, 3, 9)


def test_rerun_is_byte_identical(tmp_path, capsys):
    args = ["moment-track", "--nu", "0.5", "--n", "300", "--replicas", "4"]
    assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    assert run(capsys, *args, "--workers", "3", "--out", str(tmp_path / "b"))[0] == 0
    assert (tmp_path / "a" / "records.csv").read_bytes() == (tmp_path / "b" / "records.csv").read_bytes()


@pytest.mark.parametrize(
    "argv,needle",
    [
        (["simulate"], "key 'nu': required"),
        (["simulate", "--nu", "2.5"], "key 'nu'"),
        (["simulate", "--nu", "0.5", "--replicas", "0"], "key 'replicas'"),
        (["simulate", "--nu", "0.5", "--bogus", "1"], "unrecognized arguments"),
        (["simulate", "--config", "/nonexistent/x.conf"], "/nonexistent/x.conf"),
        (["simulate", "--nu", "0.5", "--scenario", "moment_track"], "cannot run under 'simulate'"),
        (["simulate", "--nu", "0.5", "--workers", "0"], "--workers"),
        (["nope"], "invalid choice"),
    ],
)
def test_errors_are_one_line_with_status_2(argv, needle, capsys):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert err.count("\n") == 1 and err.startswith("kacsim: error: ConfigError: ")
    assert needle in err


def test_lemma_rates_accepts_both_scenarios(tmp_path, capsys):
    for scenario in ("lemma_a3_rate", "lemma_a4_rate"):
        code, _, _ = run(
            capsys, "lemma-rates", "--scenario", scenario, "--n-list", "20,40", "--replicas", "3",
            "--out", str(tmp_path / scenario),
        )
        assert code == 0


def test_run_failure_exits_1(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(capsys, "coeffs", "--nu", "0.5", "--out", str(blocker / "x"))
    assert code == 1 and err.startswith("kacsim: error: ") and str(blocker) in err


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "kacsim.cli", "coeffs", "--nu", "1.0", "--out", str(tmp_path)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert "lambda_eps" in (tmp_path / "records.csv").read_text()
