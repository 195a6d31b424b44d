"""Test objectives with analytic gradients and known optima.

Each objective is written once against the helpers in :mod:`.dual`, so the
same callable evaluates on float arrays and on dual numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import dual
from .linalg import qr_thin
from .rng import RngStream, as_stream


@dataclass(frozen=True)
class Benchmark:
    """An objective together with its derivative and what is known about it.

    ``gamma`` is the strong convexity (or PL) constant and ``lam`` the
    gradient Lipschitz constant, when known.
    """

    name: str
    dim: int
    fun: Callable
    grad: Callable
    f_star: Optional[float] = None
    x_star: Optional[np.ndarray] = None
    gamma: Optional[float] = None
    lam: Optional[float] = None
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.fun(x)

    def relative_error(self, fx: float) -> float:
        """``(f - f*) / |f*|``, or ``f - f*`` when ``f* == 0``."""
        if self.f_star is None:
            raise ValueError(f"{self.name}: optimum unknown")
        if self.f_star == 0:
            return fx - self.f_star
        return (fx - self.f_star) / abs(self.f_star)


def nesterov_worst(d: int, r: int, lam: float) -> Benchmark:
    """Nesterov's worst-case smooth convex function on the first ``r`` coordinates.

    ``f(x) = lam/4 * ((x_1^2 + sum_{i<r} (x_i - x_{i+1})^2 + x_r^2)/2 - x_1)``,
    with minimum ``-lam*r/(8(r+1))`` at ``x_i = 1 - i/(r+1)`` for ``i <= r``.
    """
    if not (1 <= r < d):
        raise ValueError(f"need 1 <= r < d, got r={r}, d={d}")
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")

    def fun(x):
        head = x[:r]
        chain = dual.sum((head[:-1] - head[1:]) ** 2)
        return lam * ((x[0] ** 2 + chain + x[r - 1] ** 2) / 2 - x[0]) / 4

    def grad(x):
        x = np.asarray(x, dtype=np.float64)
        g = np.zeros_like(x)
        h = x[:r]
        # tridiag(-1, 2, -1) applied to the first r coordinates
        Ah = 2.0 * h
        Ah[:-1] -= h[1:]
        Ah[1:] -= h[:-1]
        Ah[0] -= 1.0
        g[:r] = lam * Ah / 4
        return g

    x_star = np.zeros(d)
    x_star[:r] = 1.0 - np.arange(1, r + 1) / (r + 1)
    return Benchmark(
        name="nesterov_worst",
        dim=d,
        fun=fun,
        grad=grad,
        f_star=-lam * r / (8 * (r + 1)),
        x_star=x_star,
        gamma=None,
        lam=float(lam),
        params={"d": d, "r": r, "lam": lam},
    )


def quadratic(d: int, gamma: float, lam: float, spectrum: str = "log") -> Benchmark:
    """Diagonal quadratic ``x @ D @ x / 2`` with eigenvalues spread over ``[gamma, lam]``.

    ``spectrum`` is ``"log"`` (geometric spacing) or ``"linear"``.
    """
    if not (0 < gamma <= lam):
        raise ValueError(f"need 0 < gamma <= lam, got gamma={gamma}, lam={lam}")
    if d < 1:
        raise ValueError("d must be positive")
    if d == 1:
        eig = np.array([float(gamma)])
    elif spectrum == "log":
        eig = np.geomspace(gamma, lam, d)
    elif spectrum == "linear":
        eig = np.linspace(gamma, lam, d)
    else:
        raise ValueError(f"unknown spectrum {spectrum!r}")

    def fun(x):
        return dual.sum(eig * x * x) / 2

    def grad(x):
        return eig * np.asarray(x, dtype=np.float64)

    return Benchmark(
        name="quadratic",
        dim=d,
        fun=fun,
        grad=grad,
        f_star=0.0,
        x_star=np.zeros(d),
        gamma=float(eig.min()),
        lam=float(eig.max()),
        params={"d": d, "gamma": gamma, "lam": lam, "spectrum": spectrum, "eigenvalues": eig},
    )


def rankdef_least_squares(n: int, d: int, rank: int, rng=0, cond: float = 3.0) -> Benchmark:
    """Consistent least squares ``||A x - b||^2`` with ``rank(A) < d``.

    ``A`` has singular values spaced geometrically on ``[1, cond]`` and ``b``
    lies in its range, so ``f* = 0`` is attained on an affine set. The PL
    constant is ``2 * sigma_min^2`` and the gradient Lipschitz constant
    ``2 * sigma_max^2``.
    """
    if not (1 <= rank < d) or rank > n:
        raise ValueError(f"need 1 <= rank < d and rank <= n, got n={n}, d={d}, rank={rank}")
    rng: RngStream = as_stream(rng)
    U, _ = qr_thin(rng.standard_normal((n, rank)))
    V, _ = qr_thin(rng.standard_normal((d, rank)))
    sv = np.geomspace(1.0, cond, rank)
    A = (U * sv) @ V.T
    x_true = rng.standard_normal(d)
    b = A @ x_true

    def fun(x):
        res = A @ x - b
        return dual.sum(res * res)

    def grad(x):
        return 2.0 * A.T @ (A @ np.asarray(x, dtype=np.float64) - b)

    return Benchmark(
        name="rankdef_least_squares",
        dim=d,
        fun=fun,
        grad=grad,
        f_star=0.0,
        x_star=None,
        gamma=2.0 * sv.min() ** 2,
        lam=2.0 * sv.max() ** 2,
        params={"n": n, "d": d, "rank": rank, "A": A, "b": b, "null_basis": _null_basis(V, d)},
    )


def _null_basis(V: np.ndarray, d: int) -> np.ndarray:
    # orthonormal complement of the row space
    full, _ = np.linalg.qr(np.hstack([V, np.eye(d)]))
    return full[:, V.shape[1]: d]


def make_benchmark(spec: dict) -> Benchmark:
    """Build a benchmark from a config mapping with a ``name`` key."""
    spec = dict(spec)
    name = spec.pop("name", None)
    factories = {
        "nesterov_worst": nesterov_worst,
        "quadratic": quadratic,
        "rankdef_least_squares": rankdef_least_squares,
    }
    if name not in factories:
        raise KeyError(f"unknown benchmark {name!r}; choose from {sorted(factories)}")
    return factories[name](**spec)
