"""Command line entry point ``ssd``.

Subcommands::

    ssd run <config.json>
    ssd theory <params.json> [--out report.json]
    ssd profile <dir> --threshold 0.95 [--baseline NAME=FEVALS ...]
    ssd validate-sampler --scheme haar --d 100 --ell 10 --eps 0.5 --draws 100000

Exit codes: 0 success, 2 input error, 3 configuration mismatch.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import analytics, experiment, profiles, samplers
from .rng import RngStream

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_MISMATCH = 3


def _err(msg: str) -> None:
    print(f"ssd: error: {msg}", file=sys.stderr)


def cmd_run(args) -> int:
    try:
        cfg = experiment.load_config(args.config)
        summary = experiment.run_experiment(cfg, workers=args.workers)
    except experiment.ConfigError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except experiment.ConfigMismatch as exc:
        _err(str(exc))
        return EXIT_MISMATCH
    n = sum(s["replicates"] for s in summary["solvers"].values())
    print(f"wrote {n} traces and summary.json to {cfg.output_dir}")
    return EXIT_OK


def _write_grid_csv(path: Path, eps_values, ds, ells) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["eps", "d", "ell", "delta"])
        for eps in eps_values:
            grid = analytics.embedding_grid(eps, ds, ells)
            for i, ell in enumerate(ells):
                for j, d in enumerate(ds):
                    if ell <= d:
                        w.writerow([repr(float(eps)), int(d), int(ell), repr(float(grid[i, j]))])


def cmd_theory(args) -> int:
    path = Path(args.params)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ValueError("params must be a JSON object")
        raw = dict(raw)
        grid = raw.pop("grid", None)
        f0_err = float(raw.pop("f0_err", 1.0))
        R = raw.pop("R", None)
        grid_out = raw.pop("grid_csv", "embedding_grid.csv")
        params = analytics.TheoryParams(**raw)
        report = analytics.theory_report(params, f0_err=f0_err, R=R).to_dict()
        if grid is not None:
            ds = [int(v) for v in grid["d"]]
            ells = [int(v) for v in grid["ell"]]
            eps_values = [float(e) for e in grid.get("eps", [params.eps])]
            out = path.parent / grid_out
            _write_grid_csv(out, eps_values, ds, ells)
            report["grid_csv"] = str(out)
    except (OSError, ValueError, TypeError, KeyError) as exc:
        _err(f"bad theory parameters: {exc}")
        return EXIT_INPUT
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_OK


def _parse_baselines(items):
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise ValueError(f"baseline must look like NAME=FEVALS, got {item!r}")
        out[name] = float(value)
    return out


def cmd_profile(args) -> int:
    try:
        baselines = _parse_baselines(args.baseline)
        if not (0 < args.threshold <= 1):
            raise ValueError("threshold must lie in (0, 1]")
        groups = experiment.read_traces(args.dir)
    except FileNotFoundError as exc:
        _err(f"missing traces: {exc}")
        return EXIT_INPUT
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INPUT
    counts = {
        label: [profiles.fevals_to_fraction(r["fevals"], r["rel_error"], args.threshold) for r in runs]
        for label, runs in groups.items()
    }
    # a deterministic baseline is one trial: a vertical line at its cost
    for name, fe in baselines.items():
        counts[name] = [fe]
    try:
        taus, curves = profiles.performance_profile(counts)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INPUT
    out = Path(args.out) if args.out else Path(args.dir) / "profile.csv"
    names = list(curves)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["tau", *names])
        for i, tau in enumerate(taus):
            w.writerow([repr(float(tau)), *(repr(float(curves[n][i])) for n in names)])
    print(f"wrote {out}")
    return EXIT_OK


def cmd_validate_sampler(args) -> int:
    try:
        if args.scheme not in samplers.SCHEMES:
            raise ValueError(f"unknown scheme {args.scheme!r}")
        if args.draws < 1:
            raise ValueError("draws must be positive")
        hits, n = samplers.embedding_rate(
            RngStream(args.seed, args.stream), args.scheme, args.d, args.ell, args.eps, args.draws
        )
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INPUT
    freq = hits / n
    result = {
        "scheme": args.scheme,
        "d": args.d,
        "ell": args.ell,
        "eps": args.eps,
        "draws": n,
        "successes": hits,
        "frequency": freq,
        "stderr": math.sqrt(max(freq * (1 - freq), 0.0) / n),
    }
    if args.scheme == "haar":
        delta = analytics.embedding_probability(args.d, args.ell, args.eps)
        se = math.sqrt(delta * (1 - delta) / n)
        result["delta"] = delta
        result["z"] = (freq - delta) / se if se > 0 else (0.0 if freq == delta else math.inf)
    print(json.dumps(result, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssd", description="Stochastic subspace descent experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=None, help="override SSD_THREADS")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("theory", help="compute embedding probabilities and rate bounds")
    p.add_argument("params")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("profile", help="performance profile of completed traces")
    p.add_argument("dir")
    p.add_argument("--threshold", type=float, default=0.95)
    p.add_argument("--baseline", action="append", metavar="NAME=FEVALS")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("validate-sampler", help="Monte-Carlo embedding success rate")
    p.add_argument("--scheme", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--draws", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.set_defaults(func=cmd_validate_sampler)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
