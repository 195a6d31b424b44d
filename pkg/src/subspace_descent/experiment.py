"""Seeded batch experiments: run solver grids, write traces, aggregate bands.

Trace CSV columns (one file per solver and replicate)::

    run_id, iteration, fevals, f_value, rel_error, step_size, scheme, ell, seed, stream_id

Floats are written with ``repr`` so a parse/re-aggregate round trip is exact.
Percentiles use the nearest-rank estimator on a common evaluation grid,
each run carried forward from its last observation at or below a grid point.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .benchmarks import make_benchmark
from .oracles import BACKENDS, ObjectiveOracle
from .optimizer import Armijo, FixedStep, OptimizerConfig, gradient_descent_baseline, run
from .rng import RngStream
from .samplers import SCHEMES, STRUCTURED

TRACE_COLUMNS = (
    "run_id", "iteration", "fevals", "f_value", "rel_error",
    "step_size", "scheme", "ell", "seed", "stream_id",
)
PERCENTILES = (10, 50, 90)


class ConfigError(ValueError):
    """Malformed experiment input (CLI exit code 2)."""


class ConfigMismatch(ValueError):
    """Well-formed input that cannot be run as configured (CLI exit code 3)."""


@dataclass(frozen=True)
class SolverSpec:
    method: str
    scheme: str
    ell: Optional[int]
    step: dict
    backend: str

    @property
    def label(self) -> str:
        policy = self.step.get("policy", "armijo")
        if self.method == "gd":
            return f"gd-{policy}"
        return f"ssd-{self.scheme}-l{self.ell}-{policy}"


@dataclass
class ExperimentConfig:
    benchmark: dict
    solvers: list
    replicates: int = 10
    base_seed: int = 0
    max_iter: int = 1000
    max_fevals: Optional[int] = None
    target: Optional[float] = None
    x0: object = "zeros"
    output_dir: Path = Path("results")
    threshold: float = 0.95
    grid_points: int = 201
    allow_baseline: bool = False
    extra: dict = field(default_factory=dict)


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _expand_solvers(entries) -> list:
    if not isinstance(entries, list):
        raise ConfigError("'solvers' must be a list")
    out = []
    for entry in entries:
        if not isinstance(entry, dict):
            raise ConfigError(f"solver entry must be an object, got {entry!r}")
        method = entry.get("method", "ssd")
        steps = _as_list(entry.get("step", {"policy": "armijo"}))
        backend = entry.get("backend", "fd" if method == "gd" else "dual")
        if method == "gd":
            combos = [("gd", None, s) for s in steps]
        elif method == "ssd":
            if "ell" not in entry:
                raise ConfigError("ssd solver needs 'ell'")
            combos = itertools.product(_as_list(entry.get("scheme", "haar")), _as_list(entry["ell"]), steps)
        else:
            raise ConfigMismatch(f"unknown method {method!r}")
        for scheme, ell, step in combos:
            if not isinstance(step, dict):
                raise ConfigError(f"step must be an object, got {step!r}")
            out.append(SolverSpec(method, scheme, None if ell is None else int(ell), dict(step), backend))
    return out


def load_config(path) -> ExperimentConfig:
    """Parse a flat JSON experiment file; paths resolve against its directory."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(raw, base=path.parent)


def config_from_dict(raw: dict, base=Path(".")) -> ExperimentConfig:
    raw = dict(raw)
    try:
        bench = raw.pop("benchmark")
        solvers = _expand_solvers(raw.pop("solvers"))
    except KeyError as exc:
        raise ConfigError(f"missing key {exc}") from exc
    if not isinstance(bench, dict) or "name" not in bench:
        raise ConfigError("'benchmark' must be an object with a 'name'")
    out_dir = Path(raw.pop("output_dir", "results"))
    if not out_dir.is_absolute():
        out_dir = Path(base) / out_dir
    known = set(ExperimentConfig.__dataclass_fields__) - {"benchmark", "solvers", "output_dir", "extra"}
    kwargs = {k: raw.pop(k) for k in list(raw) if k in known}
    cfg = ExperimentConfig(benchmark=bench, solvers=solvers, output_dir=out_dir, extra=raw, **kwargs)
    if not isinstance(cfg.replicates, int) or cfg.replicates < 1:
        raise ConfigError("'replicates' must be a positive integer")
    if not (0 < cfg.threshold <= 1):
        raise ConfigError("'threshold' must lie in (0, 1]")
    return cfg


def _step_policy(step: dict):
    step = dict(step)
    policy = step.pop("policy", "armijo")
    try:
        if policy == "fixed":
            return FixedStep(**step)
        if policy == "armijo":
            return Armijo(**step)
    except TypeError as exc:
        raise ConfigError(f"bad step parameters {step}: {exc}") from exc
    raise ConfigMismatch(f"unknown step policy {policy!r}")


def _initial_point(x0, d: int) -> np.ndarray:
    if isinstance(x0, str):
        if x0 == "zeros":
            return np.zeros(d)
        if x0 == "ones":
            return np.ones(d)
        raise ConfigError(f"unknown x0 {x0!r}")
    if isinstance(x0, dict) and "random" in x0:
        return RngStream(int(x0["random"])).standard_normal(d)
    arr = np.asarray(x0, dtype=np.float64)
    if arr.shape != (d,):
        raise ConfigMismatch(f"x0 has shape {arr.shape}, benchmark dimension is {d}")
    return arr


def validate(cfg: ExperimentConfig):
    """Build the benchmark and check every solver against it.

    Raises :class:`ConfigMismatch` for anything that cannot run.
    """
    if not cfg.solvers:
        raise ConfigMismatch("solver grid is empty")
    try:
        bench = make_benchmark(cfg.benchmark)
    except KeyError as exc:
        raise ConfigMismatch(str(exc)) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad benchmark parameters: {exc}") from exc
    if cfg.target is not None and bench.f_star is None:
        raise ConfigMismatch("target needs a benchmark with known optimum")
    labels = set()
    for s in cfg.solvers:
        if s.backend not in BACKENDS:
            raise ConfigMismatch(f"unknown backend {s.backend!r}")
        if s.method == "ssd":
            if s.scheme not in SCHEMES:
                raise ConfigMismatch(f"unknown scheme {s.scheme!r}")
            if s.scheme not in STRUCTURED and not cfg.allow_baseline:
                raise ConfigMismatch(f"scheme {s.scheme!r} is a baseline; set allow_baseline")
            if not (1 <= s.ell <= bench.dim):
                raise ConfigMismatch(f"ell={s.ell} incompatible with dimension {bench.dim}")
        step = _step_policy(s.step)
        if isinstance(step, FixedStep) and step.alpha is None and bench.lam is None:
            raise ConfigMismatch(f"{s.label}: fixed default step needs the benchmark's lam")
        if s.label in labels:
            raise ConfigMismatch(f"duplicate solver {s.label}")
        labels.add(s.label)
    _initial_point(cfg.x0, bench.dim)
    return bench


def run_replicate(bench_spec: dict, solver: SolverSpec, cfg_fields: dict, run_id: int):
    """Execute one replicate; returns ``(solver label, run_id, rows)``."""
    bench = make_benchmark(bench_spec)
    oracle = ObjectiveOracle(bench, solver.backend)
    x0 = _initial_point(cfg_fields["x0"], bench.dim)
    ocfg = OptimizerConfig(
        ell=solver.ell if solver.ell is not None else bench.dim,
        scheme=solver.scheme,
        step=_step_policy(solver.step),
        max_iter=cfg_fields["max_iter"],
        max_fevals=cfg_fields["max_fevals"],
        target=cfg_fields["target"],
        seed=cfg_fields["base_seed"],
        stream_id=run_id,
        allow_baseline=cfg_fields["allow_baseline"],
    )
    if solver.method == "gd":
        trace = gradient_descent_baseline(ocfg, oracle, x0)
    else:
        trace = run(ocfg, oracle, x0)
    rows = [
        (run_id, k, fe, fv, re, a, trace.scheme, trace.ell, ocfg.seed, run_id)
        for k, fe, fv, re, a in zip(trace.iterations, trace.fevals, trace.f_values, trace.rel_errors, trace.step_sizes)
    ]
    return solver.label, run_id, rows


def _workers() -> int:
    env = os.environ.get("SSD_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"SSD_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def trace_path(out_dir: Path, label: str, run_id: int) -> Path:
    return Path(out_dir) / "traces" / f"{label}__run{run_id:04d}.csv"


def write_trace(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(TRACE_COLUMNS)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def read_trace(path: Path) -> dict:
    """Parse a trace CSV into column arrays."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"empty trace {path}")
    return {
        "run_id": int(rows[0]["run_id"]),
        "iteration": [int(r["iteration"]) for r in rows],
        "fevals": [int(r["fevals"]) for r in rows],
        "f_value": [float(r["f_value"]) for r in rows],
        "rel_error": [float(r["rel_error"]) for r in rows],
        "step_size": [float(r["step_size"]) for r in rows],
        "scheme": rows[0]["scheme"],
        "ell": int(rows[0]["ell"]),
    }


def read_traces(out_dir) -> dict:
    """All traces under ``out_dir/traces`` grouped by solver label, sorted by run id."""
    tdir = Path(out_dir) / "traces"
    files = sorted(tdir.glob("*__run*.csv")) if tdir.is_dir() else []
    if not files:
        raise FileNotFoundError(f"no trace files under {tdir}")
    groups: dict = {}
    for f in files:
        label = f.name.rsplit("__run", 1)[0]
        groups.setdefault(label, []).append(read_trace(f))
    for runs in groups.values():
        runs.sort(key=lambda t: t["run_id"])
    return dict(sorted(groups.items()))


def nearest_rank(values, q: float) -> float:
    """Nearest-rank percentile: the ``ceil(q/100 * n)``-th smallest value."""
    s = sorted(values)
    rank = max(1, math.ceil(q / 100.0 * len(s)))
    return s[rank - 1]


def carry_forward(fevals, values, grid) -> list:
    """Last observation at or below each grid point (first value before the start)."""
    idx = np.searchsorted(np.asarray(fevals), np.asarray(grid), side="right") - 1
    return [values[max(int(i), 0)] for i in idx]


def _band(runs, xkey: str, grid) -> dict:
    cols = [carry_forward(r[xkey], r["rel_error"], grid) for r in runs]
    out = {f"p{q}": [] for q in PERCENTILES}
    out["mean"] = []
    for j in range(len(grid)):
        vals = [c[j] for c in cols]
        for q in PERCENTILES:
            out[f"p{q}"].append(nearest_rank(vals, q))
        out["mean"].append(math.fsum(vals) / len(vals))
    return out


def aggregate(groups: dict, grid_points: int = 201, target: Optional[float] = None) -> dict:
    """Percentile bands of relative error on shared evaluation and iteration grids."""
    max_fe = max(r["fevals"][-1] for runs in groups.values() for r in runs)
    max_it = max(r["iteration"][-1] for runs in groups.values() for r in runs)
    fe_grid = sorted({int(round(v)) for v in np.linspace(0, max_fe, grid_points)})
    it_grid = sorted({int(round(v)) for v in np.linspace(0, max_it, grid_points)})
    summary = {
        "columns": list(TRACE_COLUMNS),
        "percentile_estimator": "nearest-rank",
        "feval_grid": fe_grid,
        "iteration_grid": it_grid,
        "solvers": {},
    }
    for label, runs in groups.items():
        entry = {
            "scheme": runs[0]["scheme"],
            "ell": runs[0]["ell"],
            "replicates": len(runs),
            "run_ids": [r["run_id"] for r in runs],
            "by_fevals": _band(runs, "fevals", fe_grid),
            "by_iteration": _band(runs, "iteration", it_grid),
            "final_rel_error": [r["rel_error"][-1] for r in runs],
            "final_fevals": [r["fevals"][-1] for r in runs],
        }
        if target is not None:
            hits = []
            for r in runs:
                hit = next((fe for fe, e in zip(r["fevals"], r["rel_error"]) if e <= target), None)
                hits.append(hit)
            ok = [h for h in hits if h is not None]
            entry["target"] = target
            entry["fevals_to_target"] = hits
            entry["median_fevals_to_target"] = nearest_rank(ok, 50) if ok else None
        summary["solvers"][label] = entry
    return summary


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> dict:
    """Run every (solver, replicate) pair, write traces and ``summary.json``."""
    validate(cfg)
    fields_ = {
        "x0": cfg.x0,
        "max_iter": cfg.max_iter,
        "max_fevals": cfg.max_fevals,
        "target": cfg.target,
        "base_seed": cfg.base_seed,
        "allow_baseline": cfg.allow_baseline,
    }
    jobs = [(cfg.benchmark, s, fields_, i) for s in cfg.solvers for i in range(cfg.replicates)]
    workers = _workers() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_replicate, *zip(*jobs)))
    else:
        results = [run_replicate(*job) for job in jobs]
    out_dir = Path(cfg.output_dir)
    for label, run_id, rows in sorted(results, key=lambda r: (r[0], r[1])):
        write_trace(trace_path(out_dir, label, run_id), rows)
    summary = aggregate(read_traces(out_dir), cfg.grid_points, cfg.target)
    summary["benchmark"] = cfg.benchmark
    summary["base_seed"] = cfg.base_seed
    write_json(out_dir / "summary.json", summary)
    return summary


def write_json(path: Path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
