import json
import math
import os
import subprocess

import pytest

CLI = os.environ.get("OPTIQ_CLI")

pytestmark = pytest.mark.skipif(CLI is None, reason="OPTIQ_CLI not set")

TINY_SUITE = {
    "eta": 1e-12,
    "max_iterations": 200,
    "problems": ["quadratic_example"],
    "solvers": ["newton", "optiq"],
}

CSV_HEADER = "problem,n,solver,status,iterations,wall_time_s,f_final,grad_norm_final"


def run(*args):
    return subprocess.run([CLI, *args], capture_output=True, text=True)


def stdout_fields(proc):
    fields = {}
    for line in proc.stdout.splitlines():
        if ": " in line:
            key, value = line.split(": ", 1)
            fields[key] = value
    return fields


def test_help():
    proc = run("--help")
    assert proc.returncode == 0
    assert "solve" in proc.stdout
    assert "bench" in proc.stdout
    assert "diagnose" in proc.stdout


def test_solve_quadratic():
    proc = run("solve", "--problem", "quadratic_example", "--x0", "0,0")
    assert proc.returncode == 0
    fields = stdout_fields(proc)
    assert fields["status"] == "Converged"
    assert fields["iterations"] == "2"
    assert fields["solver"] == "optiq"


def test_solve_newton_booth():
    proc = run("solve", "--problem", "booth", "--solver", "newton",
               "--x0", "0,0")
    assert proc.returncode == 0
    assert stdout_fields(proc)["iterations"] == "1"


def test_unknown_problem_is_config_error():
    proc = run("solve", "--problem", "does_not_exist")
    assert proc.returncode == 2


def test_unknown_solver_is_config_error():
    proc = run("solve", "--problem", "booth", "--solver", "sgd")
    assert proc.returncode == 2


def test_bad_x0_is_config_error():
    proc = run("solve", "--problem", "booth", "--x0", "1,2,3")
    assert proc.returncode == 2


def test_fe_fixed_needs_dt():
    proc = run("solve", "--problem", "booth", "--solver", "fe_fixed")
    assert proc.returncode == 2


def test_unconverged_run_exits_one():
    proc = run("solve", "--problem", "rosenbrock", "--max-iters", "3")
    assert proc.returncode == 1
    assert stdout_fields(proc)["status"] == "MaxIterations"


def test_solve_trace(tmp_path):
    trace_path = tmp_path / "trace.json"
    proc = run("solve", "--problem", "quadratic_example", "--x0", "0,0",
               "--trace", str(trace_path))
    assert proc.returncode == 0
    trace = json.loads(trace_path.read_text())
    assert len(trace) == 2
    assert trace[0]["dt"] == pytest.approx(1.0 / 101.0, abs=1e-12)
    assert trace[1]["dt"] == pytest.approx(101.0 / 100.0, abs=1e-12)
    assert trace[0]["quiescent_count"] == 1


def test_diagnose_reports_stability_bound():
    proc = run("diagnose", "--problem", "quadratic_example", "--x0", "0,0")
    assert proc.returncode == 0
    fields = stdout_fields(proc)
    lam_max = (201.0 + math.sqrt(40001.0)) / 2.0
    assert float(fields["fe_bound"]) == pytest.approx(2.0 / lam_max, rel=1e-6)
    assert float(fields["lyapunov"]) == pytest.approx(0.5, rel=1e-12)


def test_bench_csv(tmp_path):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps(TINY_SUITE))
    out = tmp_path / "report.csv"
    proc = run("bench", "--suite", str(suite), "--out", str(out))
    assert proc.returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    assert lines[1].startswith("quadratic_example,2,newton,Converged,1,")
    assert lines[2].startswith("quadratic_example,2,optiq,Converged,2,")


def test_bench_json(tmp_path):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps(TINY_SUITE))
    out = tmp_path / "report.json"
    proc = run("bench", "--suite", str(suite), "--out", str(out),
               "--format", "json")
    assert proc.returncode == 0
    report = json.loads(out.read_text())
    assert len(report["rows"]) == 2
    assert report["metadata"]["eta"] == pytest.approx(1e-12)
    newton = next(r for r in report["rows"] if r["solver"] == "newton")
    assert newton["wall_time_normalized"] == 1.0


def test_bench_rejects_bad_suite(tmp_path):
    suite = tmp_path / "bad.json"
    suite.write_text("{\"problems\": []}")
    out = tmp_path / "report.csv"
    proc = run("bench", "--suite", str(suite), "--out", str(out))
    assert proc.returncode == 2
