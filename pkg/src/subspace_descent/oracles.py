"""Objective oracles that count function evaluations.

Three derivative backends share one interface:

``"analytic"``
    Calls the benchmark gradient. One call is charged ``d + 1`` evaluations,
    the price of a forward-difference gradient.
``"dual"``
    One dual-number pass per direction (``l`` evaluations per subspace
    gradient); the value at the base point comes with the first pass.
``"fd"``
    Forward differences ``(f(x + h p) - f(x)) / h`` sharing the base value
    (``l + 1`` evaluations).
"""

from __future__ import annotations

import numpy as np

from . import dual
from .linalg import DimensionMismatchError, as_vector

BACKENDS = ("analytic", "dual", "fd")


class ObjectiveOracle:
    """Counting wrapper around a :class:`~subspace_descent.benchmarks.Benchmark`.

    Parameters
    ----------
    benchmark : Benchmark
        Objective with ``fun``, ``grad`` and ``dim``.
    backend : {"analytic", "dual", "fd"}
    h : float, optional
        Forward-difference step. Defaults to ``1e-6 * max(1, ||x||)`` at each
        base point.

    Attributes
    ----------
    n_evals : int
        Scalar objective evaluations, plain or dual.
    n_grads : int
        Analytic gradient calls.
    """

    def __init__(self, benchmark, backend: str = "dual", h: float | None = None):
        if backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {backend!r}")
        if h is not None and not h > 0:
            raise ValueError(f"h must be positive, got {h}")
        self.benchmark = benchmark
        self.dim = benchmark.dim
        self.backend = backend
        self.h = h
        self.n_evals = 0
        self.n_grads = 0

    def __repr__(self) -> str:
        return f"ObjectiveOracle({self.benchmark.name}, backend={self.backend!r}, fevals={self.fevals})"

    @property
    def fevals(self) -> int:
        """Evaluations under the experiment cost model."""
        return self.n_evals + (self.dim + 1) * self.n_grads

    def reset(self) -> None:
        self.n_evals = 0
        self.n_grads = 0

    def _check(self, x) -> np.ndarray:
        return as_vector(x, self.dim)

    def _step(self, x: np.ndarray) -> float:
        if self.h is not None:
            return self.h
        return 1e-6 * max(1.0, float(np.linalg.norm(x)))

    def value(self, x) -> float:
        x = self._check(x)
        self.n_evals += 1
        return float(self.benchmark.fun(x))

    def peek(self, x) -> float:
        """Objective value for monitoring; not charged."""
        return float(self.benchmark.fun(np.asarray(x, dtype=np.float64)))

    def directional(self, x, p) -> float:
        """``p @ grad f(x)`` through the configured backend."""
        P = np.asarray(p, dtype=np.float64).reshape(-1, 1)
        return float(self.value_and_subspace_gradient(x, P, need_value=False)[1][0])

    def subspace_gradient(self, x, P) -> np.ndarray:
        """Return ``P.T @ grad f(x)`` (length ``l``)."""
        return self.value_and_subspace_gradient(x, P, need_value=False)[1]

    def value_and_subspace_gradient(self, x, P, need_value: bool = True):
        """Return ``(f(x), P.T @ grad f(x))`` at the backend's cost.

        ``f(x)`` is ``None`` when ``need_value`` is false and the backend
        would have to pay for it separately (analytic).
        """
        x = self._check(x)
        P = np.asarray(P, dtype=np.float64)
        if P.ndim != 2 or P.shape[0] != self.dim:
            raise DimensionMismatchError(f"direction matrix of shape {P.shape} does not match dim {self.dim}")
        f = self.benchmark.fun
        l = P.shape[1]
        if self.backend == "analytic":
            fx = self.value(x) if need_value else None
            self.n_grads += 1
            return fx, P.T @ np.asarray(self.benchmark.grad(x), dtype=np.float64)
        out = np.empty(l)
        if self.backend == "dual":
            fx = None
            for i in range(l):
                v, out[i] = dual.value_and_directional(f, x, P[:, i])
                fx = v if fx is None else fx
            self.n_evals += l
            return fx, out
        h = self._step(x)
        fx = float(f(x))
        for i in range(l):
            out[i] = (float(f(x + h * P[:, i])) - fx) / h
        self.n_evals += l + 1
        return fx, out

    def gradient(self, x) -> np.ndarray:
        """Full gradient; costs ``d + 1`` (analytic, fd) or ``d`` (dual)."""
        return self.value_and_gradient(x)[1]

    def value_and_gradient(self, x):
        x = self._check(x)
        if self.backend == "analytic":
            self.n_grads += 1
            # the d+1 charge already covers the base value
            return self.peek(x), np.asarray(self.benchmark.grad(x), dtype=np.float64)
        return self.value_and_subspace_gradient(x, np.eye(self.dim))
