"""Closed-form convergence theory for stochastic subspace descent."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np


def _betacf(a: float, b: float, x: float, tol: float = 1e-16, max_iter: int = 100_000) -> float:
    """Continued fraction for ``I_x(a, b)`` (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _check_beta_args(p: float, a: float, b: float) -> None:
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if not (a > 0 and b > 0):
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")


def _front(p: float, a: float, b: float) -> float:
    return math.exp(
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(p) + b * math.log1p(-p)
    )


def _beta_tails(p: float, a: float, b: float) -> tuple[float, float]:
    # lower and upper tails, each from whichever side converges fast
    _check_beta_args(p, a, b)
    if p == 0.0:
        return 0.0, 1.0
    if p == 1.0:
        return 1.0, 0.0
    if p < (a + 1.0) / (a + b + 2.0):
        lower = _front(p, a, b) * _betacf(a, b, p) / a
        return lower, 1.0 - lower
    upper = _front(p, a, b) * _betacf(b, a, 1.0 - p) / b
    return 1.0 - upper, upper


def beta_cdf(p: float, a: float, b: float) -> float:
    """Regularised incomplete Beta function ``I_p(a, b)``.

    Evaluates the continued fraction directly below ``(a+1)/(a+b+2)`` and
    through ``I_p(a, b) = 1 - I_{1-p}(b, a)`` above it.
    """
    return _beta_tails(p, a, b)[0]


def beta_sf(p: float, a: float, b: float) -> float:
    """Upper tail ``1 - I_p(a, b)``, accurate when it is small."""
    return _beta_tails(p, a, b)[1]


def embedding_probability(d: int, ell: int, eps: float) -> float:
    """Probability that a Haar draw keeps ``||P^T v||^2 >= (1-eps)||v||^2``.

    ``||Q^T v||^2 / ||v||^2`` is Beta(l/2, (d-l)/2) distributed, so this is
    the Beta upper tail at ``(1-eps) l/d``. Exactly 1 when ``l == d``.
    """
    if not (1 <= ell <= d):
        raise ValueError(f"need 1 <= ell <= d, got ell={ell}, d={d}")
    if not (0 < eps < 1):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if ell == d:
        return 1.0
    return beta_sf((1 - eps) * ell / d, ell / 2, (d - ell) / 2)


def proxy_variance(k: int, delta: float) -> float:
    """Optimal sub-Gaussian variance proxy of Binomial(k, delta).

    ``k (1 - 2 delta) / (2 log((1-delta)/delta))``, continued by ``k/4`` at
    ``delta = 1/2``.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not (0 < delta < 1):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    u = 1.0 - 2.0 * delta
    if u == 0.0:
        return k / 4.0
    # log((1-delta)/delta) = 2 atanh(u); keeps the ratio accurate near 1/2
    return k * u / (4.0 * math.atanh(u))


def binomial_lower_tail(k: int, delta: float, t: float) -> float:
    """Exact ``P(B < k delta - t)`` for ``B ~ Bin(k, delta)``, by summation."""
    bound = k * delta - t
    total = 0.0
    for j in range(k + 1):
        if j < bound:
            total += math.comb(k, j) * delta**j * (1 - delta) ** (k - j)
    return total


@dataclass(frozen=True)
class TheoryParams:
    d: int
    ell: int
    eps: float = 0.1
    gamma: float = 1.0
    lam: float = 1.0
    k: int = 100
    t: Optional[float] = None

    def __post_init__(self):
        if not (1 <= self.ell <= self.d):
            raise ValueError(f"need 1 <= ell <= d, got ell={self.ell}, d={self.d}")
        if not (0 < self.eps < 1):
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if not (0 < self.gamma <= self.lam):
            raise ValueError(f"need 0 < gamma <= lam, got gamma={self.gamma}, lam={self.lam}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.t is not None and self.t <= 0:
            raise ValueError(f"t must be positive, got {self.t}")


def contraction_factor(d: int, ell: int, gamma: float, lam: float) -> float:
    """Expected per-step contraction ``1 - l gamma / (d lam)``."""
    return 1.0 - ell * gamma / (d * lam)


def gaussian_smoothing_factor(d: int, gamma: float, lam: float) -> float:
    """Per-step factor of the Gaussian-smoothing random search rate, ``1 - gamma/(8 lam (d+4))``."""
    return 1.0 - gamma / (8.0 * lam * (d + 4))


def expected_rate_bounds(params: TheoryParams, f0_err: float, R: float | None = None) -> dict:
    """Expected-error bound curves over ``k = 0..params.k``.

    Returns a dict with ``k``, ``omega``, ``strongly_convex`` (``omega^k f0``),
    ``nonconvex_grad`` (``2 d lam f0 / ((k+1) l)``, a bound on the smallest
    expected squared gradient norm) and, when ``R`` is given, ``convex``
    (``2 d lam R^2 / (k l)``, infinite at ``k = 0``).
    """
    if f0_err < 0:
        raise ValueError("f0_err must be nonnegative")
    p = params
    k = np.arange(p.k + 1)
    omega = contraction_factor(p.d, p.ell, p.gamma, p.lam)
    out = {
        "k": k,
        "omega": omega,
        "strongly_convex": omega**k * f0_err,
        "nonconvex_grad": 2 * p.d * p.lam * f0_err / ((k + 1) * p.ell),
    }
    if R is not None:
        with np.errstate(divide="ignore"):
            out["convex"] = np.where(k > 0, 2 * p.d * p.lam * R**2 / (np.maximum(k, 1) * p.ell), np.inf)
    return out


def high_prob_bound(params: TheoryParams) -> tuple[float, np.ndarray]:
    """High-probability rate for Haar SSD with step ``l/(d lam)``.

    Returns ``(rho, tail)`` where ``tail[k-1]`` bounds
    ``P(f_e(x_k) >= rho^k f_e(x_0))`` for ``k = 1..params.k``. ``params.t``
    defaults to ``delta / 2``.
    """
    p = params
    delta = embedding_probability(p.d, p.ell, p.eps)
    t = delta / 2 if p.t is None else p.t
    if not (0 < t <= delta):
        raise ValueError(f"t must lie in (0, delta] with delta={delta}, got {t}")
    rho = (1.0 - (1.0 - p.eps) * p.ell * p.gamma / (p.d * p.lam)) ** (delta - t)
    ks = np.arange(1, p.k + 1)
    if delta >= 1.0:
        # every embedding succeeds; the binomial is degenerate
        return rho, np.zeros(p.k)
    tail = np.array([math.exp(-((k * t) ** 2) / (2 * proxy_variance(k, delta))) for k in ks])
    return rho, tail


@dataclass
class TheoryReport:
    params: TheoryParams
    delta: float
    omega: float
    rho: float
    t: float
    sigma2: float
    bounds: dict = field(default_factory=dict)
    tail: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        def plain(v):
            if isinstance(v, np.ndarray):
                return [float(a) if np.isfinite(a) else None for a in v]
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        return {
            "params": asdict(self.params),
            "delta": self.delta,
            "omega": self.omega,
            "rho": self.rho,
            "t": self.t,
            "sigma2": self.sigma2,
            "bounds": {k: plain(v) for k, v in self.bounds.items()},
            "tail": plain(self.tail),
        }


def theory_report(params: TheoryParams, f0_err: float = 1.0, R: float | None = None) -> TheoryReport:
    """Collect the embedding probability, rates and bound curves for ``params``."""
    delta = embedding_probability(params.d, params.ell, params.eps)
    rho, tail = high_prob_bound(params)
    t = delta / 2 if params.t is None else params.t
    sigma2 = proxy_variance(params.k, delta) if delta < 1 else 0.0
    return TheoryReport(
        params=params,
        delta=delta,
        omega=contraction_factor(params.d, params.ell, params.gamma, params.lam),
        rho=rho,
        t=t,
        sigma2=sigma2,
        bounds=expected_rate_bounds(params, f0_err, R),
        tail=tail,
    )


def embedding_grid(eps: float, ds, ells) -> np.ndarray:
    """``delta`` over a (ell, d) grid; NaN where ``ell > d``."""
    out = np.full((len(ells), len(ds)), np.nan)
    for i, ell in enumerate(ells):
        for j, d in enumerate(ds):
            if ell <= d:
                out[i, j] = embedding_probability(int(d), int(ell), eps)
    return out
