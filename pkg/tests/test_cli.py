import csv
import json

import pytest

from subspace_descent import analytics, experiment
from subspace_descent.cli import main


def write_config(tmp_path, **overrides):
    cfg = {
        "benchmark": {"name": "nesterov_worst", "d": 40, "r": 10, "lam": 8.0},
        "solvers": [
            {"method": "ssd", "scheme": ["haar", "coordinate"], "ell": 3, "step": {"policy": "armijo"}},
            {"method": "gd", "step": {"policy": "fixed"}},
        ],
        "replicates": 2,
        "base_seed": 11,
        "max_iter": 30,
        "target": 0.1,
        "output_dir": "out",
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_run_writes_traces_and_summary(tmp_path, capsys):
    path = write_config(tmp_path)
    assert main(["run", str(path), "--workers", "1"]) == 0
    out = tmp_path / "out"
    files = sorted(p.name for p in (out / "traces").iterdir())
    assert files == [
        "gd-fixed__run0000.csv",
        "gd-fixed__run0001.csv",
        "ssd-coordinate-l3-armijo__run0000.csv",
        "ssd-coordinate-l3-armijo__run0001.csv",
        "ssd-haar-l3-armijo__run0000.csv",
        "ssd-haar-l3-armijo__run0001.csv",
    ]
    with open(out / "traces" / files[-1], newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == experiment.TRACE_COLUMNS
    assert rows[1][0] == "1" and rows[1][-1] == "1"
    summary = json.loads((out / "summary.json").read_text())
    band = summary["solvers"]["ssd-haar-l3-armijo"]["by_fevals"]
    assert set(band) == {"p10", "p50", "p90", "mean"}
    assert len(band["p50"]) == len(summary["feval_grid"])
    assert summary["percentile_estimator"] == "nearest-rank"


def test_run_is_byte_identical(tmp_path):
    path = write_config(tmp_path)
    main(["run", str(path), "--workers", "1"])
    first = {p.name: p.read_bytes() for p in (tmp_path / "out" / "traces").iterdir()}
    summary = (tmp_path / "out" / "summary.json").read_bytes()
    main(["run", str(path), "--workers", "1"])
    second = {p.name: p.read_bytes() for p in (tmp_path / "out" / "traces").iterdir()}
    assert first == second
    assert summary == (tmp_path / "out" / "summary.json").read_bytes()


def test_parallel_matches_serial(tmp_path):
    a = write_config(tmp_path, output_dir="serial")
    main(["run", str(a), "--workers", "1"])
    b = write_config(tmp_path, output_dir="parallel")
    main(["run", str(b), "--workers", "2"])
    ser = {p.name: p.read_bytes() for p in (tmp_path / "serial" / "traces").iterdir()}
    par = {p.name: p.read_bytes() for p in (tmp_path / "parallel" / "traces").iterdir()}
    assert ser == par


def test_round_trip_reaggregation(tmp_path):
    path = write_config(tmp_path)
    main(["run", str(path), "--workers", "1"])
    out = tmp_path / "out"
    summary = json.loads((out / "summary.json").read_text())
    again = experiment.aggregate(experiment.read_traces(out), target=0.1)
    again["benchmark"] = summary["benchmark"]
    again["base_seed"] = summary["base_seed"]
    assert json.loads(json.dumps(again, sort_keys=True)) == summary


def test_empty_solver_grid(tmp_path, capsys):
    path = write_config(tmp_path, solvers=[])
    assert main(["run", str(path)]) == 3
    assert "empty" in capsys.readouterr().err


@pytest.mark.parametrize(
    "overrides",
    [
        {"solvers": [{"method": "ssd", "ell": 100}]},
        {"solvers": [{"method": "ssd", "ell": 2, "scheme": "gaussian"}]},
        {"solvers": [{"method": "ssd", "ell": 2, "backend": "reverse"}]},
        {"benchmark": {"name": "rosenbrock"}},
        {"solvers": [{"method": "newton"}]},
    ],
)
def test_mismatch_exit_code(tmp_path, overrides):
    assert main(["run", str(write_config(tmp_path, **overrides))]) == 3


def test_parse_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 2
    assert main(["run", str(write_config(tmp_path, replicates=0))]) == 2
    cfg = json.loads(write_config(tmp_path).read_text())
    del cfg["benchmark"]
    bad.write_text(json.dumps(cfg))
    assert main(["run", str(bad)]) == 2


def test_theory_command(tmp_path, capsys):
    params = tmp_path / "params.json"
    params.write_text(json.dumps({
        "d": 100, "ell": 10, "eps": 0.1, "gamma": 1.0, "lam": 10.0, "k": 20,
        "grid": {"d": [10, 50, 100], "ell": [1, 5, 10, 50, 100], "eps": [0.01, 0.1, 0.2]},
    }))
    assert main(["theory", str(params)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["delta"] == analytics.embedding_probability(100, 10, 0.1)
    assert report["omega"] == pytest.approx(0.99)
    with open(tmp_path / "embedding_grid.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        if r["d"] == r["ell"]:
            assert float(r["delta"]) == 1.0
    sub = [r for r in rows if r["eps"] == "0.1" and r["d"] == "100"]
    vals = [float(r["delta"]) for r in sorted(sub, key=lambda r: int(r["ell"]))]
    assert vals == sorted(vals)


def test_theory_bad_params(tmp_path):
    params = tmp_path / "params.json"
    params.write_text(json.dumps({"d": 5, "ell": 9}))
    assert main(["theory", str(params)]) == 2
    params.write_text(json.dumps({"d": 5, "ell": 2, "eps": 0.1, "t": 0.99}))
    assert main(["theory", str(params)]) == 2


def test_validate_sampler_matches_theory(capsys):
    assert main(["validate-sampler", "--scheme", "haar", "--d", "40", "--ell", "4", "--eps", "0.5", "--draws", "50000"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert abs(res["z"]) < 3
    assert res["delta"] == analytics.embedding_probability(40, 4, 0.5)


def test_validate_sampler_bad_input():
    assert main(["validate-sampler", "--scheme", "sobol", "--d", "4", "--ell", "2", "--eps", "0.5"]) == 2
    assert main(["validate-sampler", "--scheme", "haar", "--d", "4", "--ell", "5", "--eps", "0.5"]) == 2


def test_profile_command(tmp_path):
    path = write_config(tmp_path, max_iter=400, target=None, replicates=3)
    main(["run", str(path), "--workers", "1"])
    out = tmp_path / "out"
    assert main(["profile", str(out), "--threshold", "0.9", "--baseline", "bfgs=500"]) == 0
    with open(out / "profile.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["tau", "gd-fixed", "ssd-coordinate-l3-armijo", "ssd-haar-l3-armijo", "bfgs"]
    assert float(rows[0]["tau"]) == 1.0
    for name in list(rows[0])[1:]:
        col = [float(r[name]) for r in rows]
        assert col == sorted(col) and 0 <= col[0] and col[-1] <= 1
    bfgs = [float(r["bfgs"]) for r in rows]
    assert set(bfgs) <= {0.0, 1.0}


def test_profile_missing_traces(tmp_path):
    assert main(["profile", str(tmp_path), "--threshold", "0.95"]) == 2


def test_nearest_rank():
    vals = [5, 1, 4, 2, 3]
    assert experiment.nearest_rank(vals, 10) == 1
    assert experiment.nearest_rank(vals, 50) == 3
    assert experiment.nearest_rank(vals, 90) == 5


def test_carry_forward():
    assert experiment.carry_forward([0, 3, 7], [1.0, 0.5, 0.1], [0, 2, 3, 6, 7, 100]) == [1.0, 1.0, 0.5, 0.5, 0.1, 0.1]


def test_threads_env(monkeypatch):
    monkeypatch.setenv("SSD_THREADS", "3")
    assert experiment._workers() == 3
    monkeypatch.setenv("SSD_THREADS", "x")
    with pytest.raises(experiment.ConfigError):
        experiment._workers()


def test_numpy_scalar_step_written_as_plain_float(tmp_path):
    cfg = {
        "benchmark": {"name": "rankdef_least_squares", "n": 12, "d": 8, "rank": 4, "rng": 1},
        "solvers": [{"method": "ssd", "scheme": "haar", "ell": 2, "step": {"policy": "fixed"}}],
        "replicates": 1,
        "max_iter": 3,
        "output_dir": "out",
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    assert main(["run", str(path), "--workers", "1"]) == 0
    text = next((tmp_path / "out" / "traces").iterdir()).read_text()
    assert "np." not in text
