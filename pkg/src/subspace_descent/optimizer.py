"""Stochastic subspace descent and a full-gradient baseline.

One SSD iteration draws ``P`` (d x l), asks the oracle for the ``l``
directional derivatives ``P^T grad f(x)`` and moves to
``x - alpha * P @ (P^T grad f(x))``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .linalg import as_vector
from .rng import RngStream
from .samplers import get_sampler

CONVERGED = "converged"
FEVAL_BUDGET = "feval-budget"
ITERATION_BUDGET = "iteration-budget"
LINESEARCH_FAILURE = "linesearch-failure"


@dataclass(frozen=True)
class FixedStep:
    """Constant step. ``alpha=None`` picks ``l/(d lam)`` for SSD and ``1/lam`` for GD."""

    alpha: Optional[float] = None


@dataclass(frozen=True)
class Armijo:
    """Backtracking on ``f(x - a g) <= f(x) - slope * a * <grad f, g>``."""

    alpha0: float = 1.0
    shrink: float = 0.5
    slope: float = 1e-4
    max_backtracks: int = 50

    def __post_init__(self):
        if not self.alpha0 > 0:
            raise ValueError("alpha0 must be positive")
        if not (0 < self.shrink < 1):
            raise ValueError("shrink must lie in (0, 1)")
        if not (0 < self.slope < 1):
            raise ValueError("slope must lie in (0, 1)")
        if self.max_backtracks < 0:
            raise ValueError("max_backtracks must be nonnegative")


StepPolicy = Union[FixedStep, Armijo]


@dataclass(frozen=True)
class OptimizerConfig:
    ell: int
    scheme: str = "haar"
    step: StepPolicy = field(default_factory=Armijo)
    max_iter: int = 1000
    max_fevals: Optional[int] = None
    target: Optional[float] = None
    seed: int = 0
    stream_id: int = 0
    allow_baseline: bool = False

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError(f"ell must be positive, got {self.ell}")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")


@dataclass
class OptimizerTrace:
    """Per-iteration record of a run.

    Row ``k`` holds the state after ``k`` iterations: cumulative evaluations,
    ``f(x_k)``, relative error and the step that produced ``x_k``.
    """

    scheme: str
    ell: int
    seed: int
    stream_id: int
    iterations: list = field(default_factory=list)
    fevals: list = field(default_factory=list)
    f_values: list = field(default_factory=list)
    rel_errors: list = field(default_factory=list)
    step_sizes: list = field(default_factory=list)
    status: Optional[str] = None
    x: Optional[np.ndarray] = None

    def append(self, k, fevals, fx, rel, alpha):
        self.iterations.append(k)
        self.fevals.append(fevals)
        self.f_values.append(fx)
        self.rel_errors.append(rel)
        self.step_sizes.append(alpha)

    def __len__(self) -> int:
        return len(self.iterations)

    def fevals_to_reach(self, threshold: float) -> Optional[int]:
        """Evaluations spent when the relative error first dropped to ``threshold``."""
        for fe, r in zip(self.fevals, self.rel_errors):
            if r <= threshold:
                return fe
        return None


def ssd_step(x, oracle, P, alpha: float) -> np.ndarray:
    """One update ``x - alpha * P @ (P^T grad f(x))``."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    M = getattr(P, "P", P)
    return np.asarray(x, dtype=np.float64) - alpha * (M @ oracle.subspace_gradient(x, M))


def _relative_error(benchmark, fx: float) -> float:
    if benchmark.f_star is None:
        return float("nan")
    return float(benchmark.relative_error(fx))


def _resolve_fixed_alpha(step: FixedStep, lam, limit_scale: float, default_scale: float) -> float:
    # limit_scale / lam is the largest stable step
    if step.alpha is None:
        if lam is None:
            raise ValueError("fixed step needs alpha or a benchmark with known lam")
        return float(default_scale / lam)
    if step.alpha <= 0:
        raise ValueError(f"alpha must be positive, got {step.alpha}")
    if lam is not None and step.alpha >= limit_scale / lam:
        warnings.warn(
            f"step {step.alpha:g} is not below {limit_scale / lam:g}; descent is not guaranteed",
            RuntimeWarning,
            stacklevel=3,
        )
    return float(step.alpha)


def _descend(config: OptimizerConfig, oracle, x0, direction, alpha_fixed, scheme, ell, callback=None) -> OptimizerTrace:
    bench = oracle.benchmark
    x = as_vector(x0, oracle.dim, "x0").copy()
    trace = OptimizerTrace(scheme=scheme, ell=ell, seed=config.seed, stream_id=config.stream_id)
    fx_mon = oracle.peek(x)
    trace.append(0, oracle.fevals, fx_mon, _relative_error(bench, fx_mon), 0.0)
    if callback is not None:
        callback(0, x)
    step = config.step
    k = 0
    while True:
        rel = trace.rel_errors[-1]
        if config.target is not None and rel <= config.target:
            trace.status = CONVERGED
            break
        if k >= config.max_iter:
            trace.status = ITERATION_BUDGET
            break
        if config.max_fevals is not None and oracle.fevals >= config.max_fevals:
            trace.status = FEVAL_BUDGET
            break

        fx, g, slope = direction(x, isinstance(step, Armijo))
        if isinstance(step, FixedStep):
            alpha = alpha_fixed
            x = x - alpha * g
        elif slope <= 0:
            # zero subspace gradient: nothing to search along
            alpha = 0.0
        else:
            alpha = step.alpha0
            for _ in range(step.max_backtracks + 1):
                x_new = x - alpha * g
                if oracle.value(x_new) <= fx - step.slope * alpha * slope:
                    break
                alpha *= step.shrink
            else:
                trace.status = LINESEARCH_FAILURE
                break
            x = x_new
        k += 1
        fx_mon = oracle.peek(x)
        trace.append(k, oracle.fevals, fx_mon, _relative_error(bench, fx_mon), alpha)
        if callback is not None:
            callback(k, x)
    trace.x = x
    return trace


def run(config: OptimizerConfig, oracle, x0, callback=None) -> OptimizerTrace:
    """Minimise ``oracle``'s objective by stochastic subspace descent from ``x0``.

    Stops at the first of: relative error at most ``config.target``,
    ``max_iter`` iterations, ``max_fevals`` evaluations, or a line search
    that exhausts its backtracks. ``callback(k, x_k)`` is called after every
    iterate is recorded, starting with ``k = 0``.
    """
    d = oracle.dim
    if config.ell > d:
        raise ValueError(f"ell={config.ell} exceeds dimension {d}")
    sampler = get_sampler(config.scheme, allow_baseline=config.allow_baseline)
    rng = RngStream(config.seed, config.stream_id)
    ell = config.ell

    alpha = None
    if isinstance(config.step, FixedStep):
        alpha = _resolve_fixed_alpha(config.step, oracle.benchmark.lam, 2 * ell / d, ell / d)

    def direction(x, need_value):
        P = sampler(rng, d, ell).P
        fx, sg = oracle.value_and_subspace_gradient(x, P, need_value=need_value)
        # slope along -g is <grad f, P P^T grad f> = ||P^T grad f||^2
        return fx, P @ sg, float(sg @ sg)

    return _descend(config, oracle, x0, direction, alpha, config.scheme, ell, callback)


def gradient_descent_baseline(config: OptimizerConfig, oracle, x0, callback=None) -> OptimizerTrace:
    """Full-gradient descent under the same step policies and stopping rules.

    Each gradient costs ``d + 1`` evaluations with the analytic or
    finite-difference backend.
    """
    d = oracle.dim
    alpha = None
    if isinstance(config.step, FixedStep):
        alpha = _resolve_fixed_alpha(config.step, oracle.benchmark.lam, 2.0, 1.0)

    def direction(x, need_value):
        fx, g = oracle.value_and_gradient(x)
        return fx, g, float(g @ g)

    return _descend(config, oracle, x0, direction, alpha, "gd", d, callback)
