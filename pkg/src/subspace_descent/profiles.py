"""Dolan-More style performance profiles over replicated runs."""

from __future__ import annotations

import math
from typing import Mapping, Optional, Sequence

import numpy as np


def _clean(counts: Sequence[Optional[float]]) -> np.ndarray:
    vals = [math.inf if c is None else float(c) for c in counts]
    return np.asarray(vals, dtype=np.float64)


def performance_profile(runs: Mapping[str, Sequence[Optional[float]]], taus=None):
    """Fraction of each solver's trials solved within ``tau`` times the best cost.

    Parameters
    ----------
    runs : mapping of str to sequence
        Evaluation counts needed to reach the threshold, one per trial.
        ``None`` (or ``inf``) marks an unsuccessful trial; those never count.
    taus : array_like, optional
        Ratios at which to evaluate the curves. Defaults to 200 points
        log-spaced from 1 to the largest finite ratio.

    Returns
    -------
    taus : ndarray
    curves : dict of str to ndarray
        ``curves[name][i]`` is the fraction of that solver's trials with
        ``M <= taus[i] * M_best``, ``M_best`` being the smallest count over
        every trial of every solver.
    """
    if not runs or all(len(v) == 0 for v in runs.values()):
        raise ValueError("performance_profile needs at least one trial")
    data = {name: _clean(v) for name, v in runs.items()}
    finite = np.concatenate([v[np.isfinite(v)] for v in data.values()])
    if finite.size == 0:
        best = math.inf
    else:
        best = float(finite.min())
        if best <= 0:
            raise ValueError("evaluation counts must be positive")
    if taus is None:
        hi = float(finite.max() / best) if finite.size else 1.0
        taus = np.geomspace(1.0, max(hi, 1.0 + 1e-12), 200)
    taus = np.asarray(taus, dtype=np.float64)
    curves = {}
    for name, v in data.items():
        if len(v) == 0:
            curves[name] = np.zeros_like(taus)
            continue
        ratio = np.sort(v / best) if math.isfinite(best) else np.full(len(v), math.inf)
        curves[name] = np.searchsorted(ratio, taus, side="right") / len(v)
    return taus, curves


def fevals_to_fraction(fevals: Sequence[float], rel_errors: Sequence[float], fraction: float) -> Optional[float]:
    """Cost at which a run first closes ``fraction`` of its initial gap to the optimum.

    Works on relative errors, so ``f*`` itself is not needed:
    ``f_k - f* <= (1 - fraction)(f_0 - f*)`` iff
    ``rel_k <= (1 - fraction) rel_0``.
    """
    if not (0 < fraction <= 1):
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    goal = (1.0 - fraction) * rel_errors[0]
    for fe, r in zip(fevals, rel_errors):
        if r <= goal:
            return fe
    return None
