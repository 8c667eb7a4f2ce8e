"""Experiment runner, CSV output and command-line interface."""

import json
import subprocess
import sys

import numpy as np
import pytest

from qsearch.cli import main
from qsearch.errors import ConfigurationError
from qsearch.experiments import SCHEMA, ExperimentSpec, contour_points, run_experiment
from qsearch.theory import dqs_expected_distance, dqs_expected_error
from qsearch.verify import check_dominance, check_monotone, sweep


def rows(csv_text):
    lines = [l for l in csv_text.splitlines() if not l.startswith("#")]
    head = lines[0].split(",")
    return [dict(zip(head, l.split(","))) for l in lines[1:]]


def test_spec_rejects_bad_input():
    with pytest.raises(ConfigurationError):
        ExperimentSpec("bogus")
    with pytest.raises(ConfigurationError):
        ExperimentSpec("sweep_m", m_grid=())
    with pytest.raises(ConfigurationError):
        ExperimentSpec("sweep_m", strategies=("pqs",), p=0.1, seed=None)
    with pytest.raises(ConfigurationError):
        ExperimentSpec.from_dict({"kind": "sweep_m", "colour": 1})
    with pytest.raises(ConfigurationError):
        ExperimentSpec("mission")


def test_error_curve_matches_law():
    res = run_experiment(ExperimentSpec("error_curve", m_grid=(2, 5), n_theta=1000, n_samples=20))
    for r in rows(res.table.to_csv()):
        m = float(r["parameter"])
        assert float(r["theory"]) == dqs_expected_error(m, 20)
        assert abs(float(r["error_mean"]) - float(r["theory"])) <= 3 * float(r["error_se"])


def test_distance_curve_matches_law():
    res = run_experiment(ExperimentSpec("distance_curve", m_grid=(3, 10), n_theta=1000))
    for r in rows(res.table.to_csv()):
        m = float(r["parameter"])
        assert float(r["distance_mean"]) == pytest.approx(dqs_expected_distance(m), abs=3 * float(r["distance_se"]) + 2e-4)


def test_time_cells_recompute():
    spec = ExperimentSpec("sweep_m", strategies=("dqs",), m_grid=(2, 4), n_theta=20, gammas=(1, 60),
                          velocities=(0.5, 4))
    table = rows(run_experiment(spec).table.to_csv())
    assert len(table) == 2 * 4
    for r in table:
        t = float(r["gamma"]) * float(r["samples_mean"]) + float(r["eta"]) * float(r["distance_mean"])
        assert float(r["time_s"]) == pytest.approx(t, rel=1e-12)
        assert float(r["time_days"]) == pytest.approx(t / 86400, rel=1e-12)


def test_csv_is_byte_identical(tmp_path):
    spec = dict(kind="sweep_m", strategies=("pqs", "tpqs"), p=0.1, seed=4, m_grid=(2, 5), n_theta=8,
                replicates=3, delta=0.01)
    a = run_experiment(ExperimentSpec(**spec, output=str(tmp_path / "a.csv")))
    run_experiment(ExperimentSpec(**spec, output=str(tmp_path / "b.csv")))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert a.table.to_csv().startswith(SCHEMA + "\n")


def test_tpqs_dominates_small_sweep():
    spec = ExperimentSpec("sweep_m", strategies=("pqs", "tpqs"), p=0.1, seed=0, m_grid=(5, 10), n_theta=20,
                          replicates=5)
    table = rows(run_experiment(spec).table.to_csv())
    by = {(r["strategy"], r["parameter"]): r for r in table}
    for m in ("5.0", "10.0"):
        q, t = by[("pqs", m)], by[("tpqs", m)]
        for col in ("samples", "distance"):
            tol = 3 * np.hypot(float(q[col + "_se"]), float(t[col + "_se"]))
            assert float(t[col + "_mean"]) <= float(q[col + "_mean"]) + tol


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_orderings_hold_across_seeds(seed):
    m_values = (2, 5, 20)
    pq = sweep("pqs", 0.1, m_values, 15, 6, seed)
    tq = sweep("tpqs", 0.1, m_values, 15, 6, seed)
    assert check_monotone(pq, "pqs").passed
    assert check_monotone(tq, "tpqs").passed
    assert check_dominance(pq, tq).passed


def test_contour_points_interpolate():
    diff = np.array([[-1.0, 1.0], [-1.0, -1.0]])
    pts = contour_points([1.0, 2.0], [0.5, 1.5], diff)
    assert {"gamma": 1.0, "velocity": 1.0} in pts
    assert {"gamma": 1.5, "velocity": 1.5} in pts
    assert contour_points([1.0], [1.0], np.array([[2.0]])) == []


def test_compare_grid_summary():
    spec = ExperimentSpec("compare_grid", p_values=(0.0,), m_grid=(2, 10, 40), lambda_grid=(0.0, 0.5), n_theta=10,
                          gammas=(1.0, 60.0), velocities=(0.5, 4.0), epsilon=1e-3)
    grid = run_experiment(spec).summary["grids"]["p=0"]
    assert grid["quantile"] == "dqs"
    assert len(grid["cells"]) == 4
    for c in grid["cells"]:
        assert c["difference_s"] == pytest.approx(c["quantile_time_s"] - c["proactive_time_s"])


def test_cli_theory(capsys):
    assert main(["theory", "--m-grid", "2", "--n-grid", "20", "--p-grid", "0"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("m,n,p")
    assert float(out[1].split(",")[3]) == pytest.approx(2.0**-22)


def test_cli_search_json(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    assert main(["search", "--strategy", "dqs", "--m", "5", "--theta", "0.3333", "--output", str(trace)]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["error"] <= 1e-4 and rec["samples"] > 0
    assert trace.read_text().startswith("step,x,y,a,b,cum_distance")


def test_cli_noisy_run_needs_seed(capsys):
    assert main(["search", "--strategy", "pqs", "--p", "0.1", "--theta", "0.3"]) == 2
    assert main(["sweep", "--strategies", "pqs", "--p", "0.1", "--n-theta", "2"]) == 2
    assert "seed" in capsys.readouterr().err


def test_cli_sweep_spec_file(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"m_grid": [2, 3], "n_theta": 5}))
    assert main(["sweep", "--m-grid", "9", "--spec", str(spec)]) == 0
    table = rows(capsys.readouterr().out)
    assert sorted({r["parameter"] for r in table}) == ["2.0", "3.0"]


def test_cli_region_and_mission(tmp_path, capsys):
    raster = tmp_path / "blob.asc"
    assert main(["region", "gen", "--ncols", "120", "--nrows", "60", "--cell-size", "300", "--seed", "2",
                 "--output", str(raster)]) == 0
    out = tmp_path / "mission"
    assert main(["mission", "--region", str(raster), "--K", "5", "--strategy", "dqs", "--outdir", str(out)]) == 0
    report = json.loads(capsys.readouterr().out.split("\n", 1)[1])
    assert report["total_samples"] > 0 and not report["flags"]
    assert (out / "boundary.csv").exists() and (out / "polyline.csv").exists()


def test_cli_mission_config_unknown_key(tmp_path):
    cfg = tmp_path / "m.json"
    cfg.write_text(json.dumps({"strategy": "dqs", "wind": 3}))
    assert main(["mission", "--config", str(cfg)]) == 2


def test_cli_verify_theory(tmp_path):
    path = tmp_path / "v.json"
    assert main(["verify", "--suite", "theory", "--output", str(path)]) == 0
    report = json.loads(path.read_text())
    assert all(c["passed"] for c in report["checks"])


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qsearch", "theory", "--m-grid", "3", "--n-grid", "1",
                          "--p-grid", "0"], capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[1].startswith("3.0,1,0.0,")
