import csv
import json
import math

import pytest

from reset_search import cli


def run_cli(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, argv):
    code, out, err = run_cli(capsys, argv)
    assert code == 0, err
    report = json.loads(out)
    assert report["schema"] == 1
    return report


def test_eval_fixed_target(capsys):
    report = run_json(capsys, ["eval", "--dim", "1", "--mechanism", "poisson",
                               "--rate", "0.5", "--target-a", "1"])
    assert report["command"] == "eval"
    res = report["results"]
    assert res["expected_time"]["value"] == pytest.approx(3.4365636, rel=1e-6)
    assert res["units"] == "time"
    assert res["provenance"] == "analytic-closed-form"
    assert report["wall_time_s"] >= 0


def test_eval_gaussian_target_3d(capsys):
    report = run_json(capsys, ["eval", "--dim", "3", "--mechanism", "bridge",
                               "--period", "12"])
    res = report["results"]
    assert res["expected_time"]["value"] == pytest.approx(
        54.0 / math.sqrt(2 * math.pi), rel=1e-9)
    assert res["units"] == "sigma3_over_D"
    assert "eps0" in res["eps0_scaling"]


def test_eval_divergent_branch(capsys):
    report = run_json(capsys, ["eval", "--dim", "1", "--mechanism", "bridge",
                               "--period", "3"])
    assert report["results"]["expected_time"] == {"divergent": True}


def test_eval_3d_bridge_fixed_target_reports_bounds(capsys):
    report = run_json(capsys, ["eval", "--dim", "3", "--mechanism", "bridge",
                               "--period", "12", "--target-a", "1,0,0",
                               "--eps0", "0.1"])
    bounds = report["results"]["bounds"]
    assert 0 < bounds["lower"] < bounds["upper"]


def test_pretty_output_is_not_json(capsys):
    code, out, _ = run_cli(capsys, ["eval", "--dim", "1", "--mechanism",
                                    "poisson", "--rate", "0.5", "--target-a",
                                    "1", "--pretty"])
    assert code == 0
    with pytest.raises(json.JSONDecodeError):
        json.loads(out)
    assert "expected_time" in out


def test_optimize(capsys):
    report = run_json(capsys, ["optimize", "--dim", "1", "--mechanism",
                               "poisson"])
    res = report["results"]
    assert res["argmin_dimensionless"] == pytest.approx(0.491, abs=5e-3)
    assert res["min_dimensionless"] == pytest.approx(3.548, abs=5e-3)
    assert res["argmin_rate"] == pytest.approx(res["argmin_dimensionless"])
    assert res["units"] == "sigma2_over_D"


def test_optimize_dimensional_rescaling(capsys):
    report = run_json(capsys, ["optimize", "--dim", "1", "--mechanism",
                               "poisson", "--diffusion", "2", "--sigma2", "0.5"])
    res = report["results"]
    assert res["argmin_rate"] == pytest.approx(
        res["argmin_dimensionless"] * 2.0 / 0.5, rel=1e-12)


def test_exit_code_usage():
    # argparse-level error: missing required argument
    with pytest.raises(SystemExit) as exc:
        cli.main(["eval", "--mechanism", "poisson", "--rate", "1"])
    assert exc.value.code == 1


def test_exit_code_usage_missing_mechanism_param(capsys):
    code, _, err = run_cli(capsys, ["eval", "--dim", "1", "--mechanism",
                                    "poisson"])
    assert code == 1
    assert "--rate" in err


def test_exit_code_unsupported_combination(capsys):
    code, _, err = run_cli(capsys, ["eval", "--dim", "2", "--mechanism",
                                    "bridge", "--period", "4"])
    assert code == 2
    assert "dimension 2" in err


def test_exit_code_no_finite_value(capsys):
    # bracket entirely inside the divergence region
    code, _, err = run_cli(capsys, ["optimize", "--dim", "1", "--mechanism",
                                    "bridge", "--bracket", "0.1:3"])
    assert code == 3


def test_exit_code_io_error(capsys):
    code, _, err = run_cli(capsys, ["table", "--out",
                                    "/nonexistent-dir/table.csv"])
    assert code == 4


def test_exit_code_excessive_censoring(capsys):
    code, _, err = run_cli(capsys, ["simulate", "--dim", "1", "--mechanism",
                                    "poisson", "--rate", "1", "--target-a",
                                    "5", "--n", "200", "--dt", "0.01",
                                    "--max-resets", "1"])
    assert code == 5


def test_table_csv(capsys, tmp_path):
    out_file = tmp_path / "constants.csv"
    report = run_json(capsys, ["table", "--out", str(out_file)])
    assert report["results"]["rows"] == 7
    with open(out_file, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["theorem", "mechanism", "dim", "argmin", "min",
                       "paper_argmin", "paper_min", "rel_dev_argmin",
                       "rel_dev_min"]
    assert len(rows) == 8
    for row in rows[1:]:
        assert float(row[7]) < 1e-2
        assert float(row[8]) < 1e-2


def test_table_curve(capsys, tmp_path):
    out_file = tmp_path / "curve.csv"
    run_json(capsys, ["table", "--curve", "--dim", "1", "--mechanism",
                      "bridge", "--grid", "4.01:40:50", "--out", str(out_file)])
    with open(out_file, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["param", "value"]
    assert len(rows) == 51
    assert float(rows[1][0]) == pytest.approx(4.01)
    assert float(rows[-1][0]) == pytest.approx(40.0)


def test_table_curve_requires_grid(capsys):
    code, _, _ = run_cli(capsys, ["table", "--curve", "--dim", "1",
                                  "--mechanism", "bridge", "--out", "/tmp/x.csv"])
    assert code == 1


def test_simulate_deterministic_and_compared(capsys):
    argv = ["simulate", "--dim", "1", "--mechanism", "poisson", "--rate",
            "0.5", "--target-a", "1", "--n", "500", "--dt", "0.005",
            "--seed", "12"]
    first = run_json(capsys, argv)
    second = run_json(capsys, argv)
    for rep in (first, second):
        rep.pop("wall_time_s")
    assert first == second
    res = first["results"]
    assert res["provenance"] == "monte-carlo"
    assert res["analytic_value"] == pytest.approx(3.4365636, rel=1e-6)
    assert abs(res["z_score"]) < 4.0
    assert first["seed"] == 12


def test_simulate_3d_bridge_bounds_flag(capsys):
    report = run_json(capsys, ["simulate", "--dim", "3", "--mechanism",
                               "bridge", "--period", "2", "--target-a",
                               "0.5,0,0", "--eps0", "0.25", "--n", "60",
                               "--seed", "4"])
    res = report["results"]
    assert res["analytic_bounds"]["lower"] < res["analytic_bounds"]["upper"]
    assert res["inside_bounds"] in (True, False)
