import json
import subprocess
import sys

import pytest

from vfsolve import cli
from vfsolve import experiment as ex
from vfsolve.errors import SolverError
from vfsolve.experiment import ExperimentConfig
from vfsolve.problem import figure1_value

SMALL = ["--set", "m=40", "--set", "n=100", "--set", "k=5", "--set", "outliers=2"]


def test_solve_tau_on_figure1(tmp_path):
    code = cli.main(["solve", "--instance", "figure1", "--misfit", "least-squares", "--tau", "2",
                     "--set", "regularizer=one-norm", "-o", str(tmp_path), "--trace", "-q"])
    assert code == cli.EXIT_OK
    out = json.loads((tmp_path / "summary.json").read_text())
    assert out["v"] == pytest.approx(0.25, abs=1e-10) and out["mu"] == pytest.approx(0.5)
    assert (tmp_path / "trace.csv").read_text().startswith("iter,f,pg_norm,step")


def test_solve_sigma_on_figure1(tmp_path):
    code = cli.main(["solve", "--instance", "figure1", "--misfit", "least-squares", "--sigma", "0.25",
                     "--set", "newton_rtol=1e-11", "-o", str(tmp_path), "-q"])
    assert code == cli.EXIT_OK
    out = json.loads((tmp_path / "summary.json").read_text())
    assert out["tau"] == pytest.approx(2.0, abs=1e-8) and out["status"] == "converged"


def test_solve_bpdn_writes_signals(tmp_path):
    code = cli.main(["solve", *SMALL, "--misfit", "huber:kappa=0.01", "-o", str(tmp_path), "-q"])
    assert code == cli.EXIT_OK
    assert (tmp_path / "signals.csv").exists()
    assert json.loads((tmp_path / "summary.json").read_text())["relative_error"] < 0.1


def test_pareto_curve_verb(tmp_path):
    code = cli.main(["pareto-curve", "--instance", "figure1", "--misfit", "least-squares",
                     "--taus", "0:3:7", "-o", str(tmp_path), "-q"])
    assert code == cli.EXIT_OK
    rows = ex.read_curve_csv(tmp_path / "curve.csv")
    assert [r["v"] for r in rows] == pytest.approx([figure1_value(t) for t in (0, .5, 1, 1.5, 2, 2.5, 3)],
                                                   abs=1e-6)


def test_experiment_verb(tmp_path, capsys):
    code = cli.main(["experiment", *SMALL, "--replicates", "2", "-o", str(tmp_path)])
    assert code == cli.EXIT_OK
    assert (tmp_path / "summary.json").exists()
    assert "median least-squares" in capsys.readouterr().out


def test_experiment_failure_exit_code(tmp_path, monkeypatch):
    def broken(*a, **k):
        raise SolverError("injected")
    monkeypatch.setattr(ex, "solve_constrained", broken)
    assert cli.main(["experiment", *SMALL, "-o", str(tmp_path), "-q"]) == cli.EXIT_SOLVER


def test_solver_error_exit_code(tmp_path):
    # sigma below the least-squares floor of a 2 x 1 system
    (tmp_path / "A.csv").write_text("1\n1\n")
    (tmp_path / "b.csv").write_text("1\n-1\n")
    code = cli.main(["solve", "--instance", "csv", "--set", f"matrix_file={tmp_path / 'A.csv'}",
                     "--set", f"rhs_file={tmp_path / 'b.csv'}", "--set", "regularizer=one-norm",
                     "--misfit", "least-squares", "--sigma", "0.5", "-o", str(tmp_path), "-q"])
    assert code == cli.EXIT_SOLVER


def test_verify_exit_codes(tmp_path, monkeypatch):
    assert cli.main(["verify", *SMALL, "--cases", "5", "-o", str(tmp_path), "-q"]) == cli.EXIT_OK
    assert json.loads((tmp_path / "verification.json").read_text())["passed"]
    monkeypatch.setattr(ex, "verify_all", lambda cfg, cases: {"checks": [], "passed": False})
    assert cli.main(["verify", "-o", str(tmp_path), "-q"]) == cli.EXIT_VERIFY


@pytest.mark.parametrize("argv", [
    ["solve", "--set", "m=oops"],
    ["solve", "--set", "novalue"],
    ["solve", "--set", "unknown_key=1"],
    ["solve", "--config", "/nonexistent/run.ini"],
    ["solve", "--misfit", "cauchy"],
])
def test_config_errors(argv, capsys):
    assert cli.main(argv) == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.ini"
    ExperimentConfig(m=30, n=60, seed=4, noise_std=0.01).save(path)
    args = cli.build_parser().parse_args(["experiment", "-c", str(path), "--set", "seed=8", "--seed", "9",
                                          "--set", "noise_std=0.02"])
    cfg = cli.load_config(args)
    assert (cfg.m, cfg.n, cfg.seed, cfg.noise_std) == (30, 60, 9, 0.02)


def test_help_runs():
    out = subprocess.run([sys.executable, "-m", "vfsolve.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for verb in ("solve", "pareto-curve", "experiment", "verify"):
        assert verb in out.stdout
