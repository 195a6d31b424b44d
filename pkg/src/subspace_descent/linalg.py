"""Dense float64 kernels used by the samplers and the optimizer.

Vectors and matrices are plain ``numpy`` arrays of dtype float64; the helpers
here only add shape checking and the sign-normalised thin QR.
"""

from __future__ import annotations

import numpy as np

from .rng import RngStream


class DimensionMismatchError(ValueError):
    pass


class RankDeficiencyError(np.linalg.LinAlgError):
    pass


def as_vector(x, dim: int | None = None, name: str = "x") -> np.ndarray:
    """Validate ``x`` as a finite 1-d float64 array, optionally of length ``dim``."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatchError(f"{name} must be a non-empty 1-d array, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatchError(f"{name} has length {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def as_matrix(A, name: str = "A") -> np.ndarray:
    M = np.asarray(A, dtype=np.float64)
    if M.ndim != 2 or 0 in M.shape:
        raise DimensionMismatchError(f"{name} must be a non-empty 2-d array, got shape {M.shape}")
    return M


def gaussian_matrix(rng: RngStream, rows: int, cols: int) -> np.ndarray:
    """Matrix of iid N(0, 1) entries drawn from ``rng``."""
    if rows < 1 or cols < 1:
        raise ValueError(f"dimensions must be positive, got ({rows}, {cols})")
    return rng.standard_normal((rows, cols))


def qr_thin(A) -> tuple[np.ndarray, np.ndarray]:
    """Thin Householder QR with a positive diagonal in ``R``.

    Parameters
    ----------
    A : array_like, shape (d, l)
        Full column rank matrix with ``d >= l``.

    Returns
    -------
    Q : ndarray, shape (d, l)
        Orthonormal columns.
    R : ndarray, shape (l, l)
        Upper triangular with ``R[i, i] > 0``.

    Raises
    ------
    RankDeficiencyError
        If some ``|R[i, i]|`` falls below ``1e-12 * ||A||``.
    """
    A = as_matrix(A)
    d, l = A.shape
    if d < l:
        raise DimensionMismatchError(f"thin QR needs rows >= cols, got {A.shape}")
    Q, R = np.linalg.qr(A, mode="reduced")
    diag = np.diagonal(R)
    if np.any(np.abs(diag) < 1e-12 * np.linalg.norm(A)):
        raise RankDeficiencyError("matrix is numerically rank deficient")
    signs = np.where(diag < 0, -1.0, 1.0)
    return Q * signs, R * signs[:, None]


def qr_thin_batch(A: np.ndarray) -> np.ndarray:
    """Sign-normalised ``Q`` factors for a stack of shape (n, d, l)."""
    Q, R = np.linalg.qr(A, mode="reduced")
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    # ||A||_F = ||R||_F since Q has orthonormal columns
    scale = np.sqrt(np.einsum("nij,nij->n", R, R))
    if np.any(np.abs(diag) < 1e-12 * scale[:, None]):
        raise RankDeficiencyError("a matrix in the batch is numerically rank deficient")
    Q *= np.where(diag < 0, -1.0, 1.0)[:, None, :]
    return Q


def _conform(A, x, inner: int):
    A = as_matrix(A)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != A.shape[inner]:
        raise DimensionMismatchError(f"cannot apply matrix of shape {A.shape} to vector of shape {x.shape}")
    return A, x


def matvec(A, x) -> np.ndarray:
    A, x = _conform(A, x, 1)
    return A @ x


def matTvec(A, x) -> np.ndarray:
    A, x = _conform(A, x, 0)
    return A.T @ x


def axpy(a: float, x, y) -> np.ndarray:
    """Return ``a * x + y``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionMismatchError(f"shapes {x.shape} and {y.shape} differ")
    return a * x + y


def norm2(x) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=np.float64)))
