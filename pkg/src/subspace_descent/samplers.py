"""Random direction matrices ``P`` of shape (d, l).

``haar`` and ``coordinate`` draws satisfy ``E[P P^T] = I`` and
``P^T P = (d/l) I`` exactly. ``gaussian`` (iid Gaussian smoothing
directions) is only unbiased and is kept as a baseline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import as_vector, gaussian_matrix, qr_thin, qr_thin_batch
from .rng import RngStream

SCHEMES = ("haar", "coordinate", "gaussian")
STRUCTURED = ("haar", "coordinate")


@dataclass(frozen=True)
class DirectionMatrix:
    P: np.ndarray
    scheme: str
    columns: Optional[np.ndarray] = None

    @property
    def d(self) -> int:
        return self.P.shape[0]

    @property
    def ell(self) -> int:
        return self.P.shape[1]

    @property
    def structured(self) -> bool:
        """Whether ``P^T P = (d/l) I`` holds by construction."""
        return self.scheme in STRUCTURED


def _check_dims(d: int, ell: int) -> None:
    if not (1 <= ell <= d):
        raise ValueError(f"need 1 <= ell <= d, got ell={ell}, d={d}")


def sample_haar(rng: RngStream, d: int, ell: int) -> DirectionMatrix:
    """``sqrt(d/l) Q`` with ``Q`` the sign-normalised thin QR factor of a Gaussian matrix."""
    _check_dims(d, ell)
    Q, _ = qr_thin(gaussian_matrix(rng, d, ell))
    return DirectionMatrix(np.sqrt(d / ell) * Q, "haar")


def _partial_shuffle(rng: RngStream, d: int, ell: int) -> np.ndarray:
    # first ell steps of Fisher-Yates
    perm = np.arange(d)
    for i in range(ell):
        j = int(rng.integers(i, d))
        perm[i], perm[j] = perm[j], perm[i]
    return perm[:ell]


def sample_coordinate(rng: RngStream, d: int, ell: int) -> DirectionMatrix:
    """``sqrt(d/l)`` times ``l`` distinct identity columns chosen uniformly."""
    _check_dims(d, ell)
    cols = _partial_shuffle(rng, d, ell)
    P = np.zeros((d, ell))
    P[cols, np.arange(ell)] = np.sqrt(d / ell)
    return DirectionMatrix(P, "coordinate", cols)


def sample_gaussian_iid(rng: RngStream, d: int, ell: int) -> DirectionMatrix:
    """``l`` iid N(0, I_d) columns scaled by ``1/sqrt(l)``; ``E[P P^T] = I`` only."""
    _check_dims(d, ell)
    return DirectionMatrix(gaussian_matrix(rng, d, ell) / np.sqrt(ell), "gaussian")


_SAMPLERS = {
    "haar": sample_haar,
    "coordinate": sample_coordinate,
    "gaussian": sample_gaussian_iid,
}


def get_sampler(scheme: str, allow_baseline: bool = False):
    """Look up a sampler by name.

    The ``gaussian`` scheme breaks ``P^T P = (d/l) I`` and must be requested
    with ``allow_baseline=True``.
    """
    if scheme not in _SAMPLERS:
        raise KeyError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    if scheme not in STRUCTURED and not allow_baseline:
        raise ValueError(f"scheme {scheme!r} is a baseline; pass allow_baseline=True")
    return _SAMPLERS[scheme]


def sample_batch(rng: RngStream, scheme: str, d: int, ell: int, n: int) -> np.ndarray:
    """Stack of ``n`` direction matrices, shape (n, d, l).

    Same distribution as repeated single draws, generated in bulk for
    Monte-Carlo work.
    """
    _check_dims(d, ell)
    g = rng.generator
    if scheme == "haar":
        Z = g.standard_normal((n, d, ell))
        return np.sqrt(d / ell) * qr_thin_batch(Z)
    if scheme == "gaussian":
        return g.standard_normal((n, d, ell)) / np.sqrt(ell)
    if scheme == "coordinate":
        cols = _partial_shuffle_batch(g, n, d, ell)
        P = np.zeros((n, d, ell))
        P[np.arange(n)[:, None], cols, np.arange(ell)[None, :]] = np.sqrt(d / ell)
        return P
    raise KeyError(f"unknown scheme {scheme!r}")


def _partial_shuffle_batch(g: np.random.Generator, n: int, d: int, ell: int) -> np.ndarray:
    perm = np.tile(np.arange(d), (n, 1))
    rows = np.arange(n)
    for i in range(ell):
        j = g.integers(i, d, size=n)
        pi, pj = perm[rows, i].copy(), perm[rows, j].copy()
        perm[rows, i], perm[rows, j] = pj, pi
    return perm[:, :ell]


def embedding_success(P, v, eps: float) -> bool:
    """True iff ``||P^T v||^2 >= (1 - eps) ||v||^2``."""
    if not (0 < eps < 1):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    M = P.P if isinstance(P, DirectionMatrix) else np.asarray(P, dtype=np.float64)
    v = as_vector(v, M.shape[0], "v")
    vv = float(v @ v)
    if vv == 0:
        raise ValueError("v must be nonzero")
    w = M.T @ v
    return bool(w @ w >= (1 - eps) * vv)


def embedding_rate(rng: RngStream, scheme: str, d: int, ell: int, eps: float, draws: int,
                   v=None, chunk: int | None = None) -> tuple[int, int]:
    """Count successful embeddings of ``v`` (default ``e_1``) over ``draws`` samples.

    Returns ``(successes, draws)``.
    """
    if not (0 < eps < 1):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    v = np.eye(d)[0] if v is None else as_vector(v, d, "v")
    vv = float(v @ v)
    if chunk is None:
        chunk = max(1, min(draws, 4_000_000 // (d * ell)))
    hits = 0
    done = 0
    while done < draws:
        m = min(chunk, draws - done)
        P = sample_batch(rng, scheme, d, ell, m)
        w = v @ P
        hits += int(np.count_nonzero(np.einsum("nl,nl->n", w, w) >= (1 - eps) * vv))
        done += m
    return hits, draws
