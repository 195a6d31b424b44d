"""Gradient-free optimisation by stochastic subspace descent (SSD).

Each iteration draws a random d x l direction matrix ``P``, evaluates the
``l`` directional derivatives ``P^T grad f(x)`` (forward-mode AD or finite
differences) and steps along ``-P P^T grad f(x)``.

>>> import numpy as np
>>> from subspace_descent import nesterov_worst, ObjectiveOracle, OptimizerConfig, run
>>> bench = nesterov_worst(d=100, r=20, lam=8.0)
>>> trace = run(OptimizerConfig(ell=3, target=0.1, max_iter=10_000), ObjectiveOracle(bench), np.zeros(100))
>>> trace.status
'converged'
"""

from .analytics import (
    TheoryParams,
    TheoryReport,
    beta_cdf,
    embedding_probability,
    expected_rate_bounds,
    high_prob_bound,
    proxy_variance,
    theory_report,
)
from .benchmarks import Benchmark, nesterov_worst, quadratic, rankdef_least_squares
from .dual import Dual, directional_derivative
from .oracles import ObjectiveOracle
from .optimizer import Armijo, FixedStep, OptimizerConfig, OptimizerTrace, gradient_descent_baseline, run, ssd_step
from .profiles import performance_profile
from .rng import RngStream
from .samplers import (
    DirectionMatrix,
    embedding_success,
    sample_coordinate,
    sample_gaussian_iid,
    sample_haar,
)

__all__ = [
    "Armijo",
    "Benchmark",
    "DirectionMatrix",
    "Dual",
    "FixedStep",
    "ObjectiveOracle",
    "OptimizerConfig",
    "OptimizerTrace",
    "RngStream",
    "TheoryParams",
    "TheoryReport",
    "beta_cdf",
    "directional_derivative",
    "embedding_probability",
    "embedding_success",
    "expected_rate_bounds",
    "gradient_descent_baseline",
    "high_prob_bound",
    "nesterov_worst",
    "performance_profile",
    "proxy_variance",
    "quadratic",
    "rankdef_least_squares",
    "run",
    "sample_coordinate",
    "sample_gaussian_iid",
    "sample_haar",
    "ssd_step",
    "theory_report",
]
