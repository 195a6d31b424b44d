"""Forward-mode differentiation with dual numbers.

A :class:`Dual` carries a value and a single tangent. Both channels may be
floats or equally shaped float arrays, so seeding ``Dual(x, p)`` with a point
``x`` and a direction ``p`` and pushing it through an objective yields
``f(x)`` in the value channel and ``p @ grad f(x)`` in the tangent channel.

Objectives written against the helpers in this module (``sin``, ``exp``,
``sum``, ...) evaluate unchanged on plain floats, numpy arrays and duals.
"""

from __future__ import annotations

import math

import numpy as np


class Dual:
    """Number ``value + tangent * eps`` with ``eps**2 == 0``."""

    __slots__ = ("value", "tangent")
    # make numpy defer to our reflected operators
    __array_ufunc__ = None

    def __init__(self, value, tangent=0.0):
        self.value = value
        self.tangent = tangent

    def __repr__(self) -> str:
        return f"Dual({self.value!r}, {self.tangent!r})"

    # container protocol for array-valued duals
    def __getitem__(self, idx):
        return Dual(self.value[idx], self.tangent[idx])

    def __len__(self) -> int:
        return len(self.value)

    @property
    def shape(self):
        return np.shape(self.value)

    def sum(self):
        return Dual(np.sum(self.value), np.sum(self.tangent))

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value + other.value, self.tangent + other.tangent)
        return Dual(self.value + other, self.tangent)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value - other.value, self.tangent - other.tangent)
        return Dual(self.value - other, self.tangent)

    def __rsub__(self, other):
        return Dual(other - self.value, -self.tangent)

    def __neg__(self):
        return Dual(-self.value, -self.tangent)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.value * other.value,
                self.value * other.tangent + self.tangent * other.value,
            )
        return Dual(self.value * other, self.tangent * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            _check_nonzero(other.value)
            q = self.value / other.value
            return Dual(q, (self.tangent - q * other.tangent) / other.value)
        _check_nonzero(other)
        return Dual(self.value / other, self.tangent / other)

    def __rtruediv__(self, other):
        _check_nonzero(self.value)
        q = other / self.value
        return Dual(q, -q * self.tangent / self.value)

    def __pow__(self, other):
        if isinstance(other, Dual):
            # a**b = exp(b log a)
            return exp(other * log(self))
        if other == 0:
            return Dual(np.ones_like(self.value) if np.ndim(self.value) else 1.0, 0.0 * self.tangent)
        return Dual(self.value**other, other * self.value ** (other - 1) * self.tangent)

    def __rpow__(self, other):
        # c**b = exp(b log c), c a plain positive constant
        v = other**self.value
        return Dual(v, v * math.log(other) * self.tangent)

    def __abs__(self):
        return Dual(abs(self.value), np.sign(self.value) * self.tangent)

    def __matmul__(self, other):
        return dot(self, other)

    def __rmatmul__(self, other):
        return dot(other, self)


def _check_nonzero(v):
    if np.any(np.asarray(v) == 0):
        raise ZeroDivisionError("division by a dual with zero value")


def _check_positive(v, what: str):
    if np.any(np.asarray(v) <= 0):
        raise ValueError(f"{what} requires a positive argument")


def sin(x):
    if isinstance(x, Dual):
        return Dual(np.sin(x.value), np.cos(x.value) * x.tangent)
    return np.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(np.cos(x.value), -np.sin(x.value) * x.tangent)
    return np.cos(x)


def exp(x):
    if isinstance(x, Dual):
        e = np.exp(x.value)
        return Dual(e, e * x.tangent)
    return np.exp(x)


def log(x):
    if isinstance(x, Dual):
        _check_positive(x.value, "log")
        return Dual(np.log(x.value), x.tangent / x.value)
    _check_positive(x, "log")
    return np.log(x)


def sqrt(x):
    if isinstance(x, Dual):
        _check_positive(x.value, "sqrt")
        s = np.sqrt(x.value)
        return Dual(s, x.tangent / (2.0 * s))
    return np.sqrt(x)


def abs_smooth(x, mu: float = 1e-8):
    """Smooth absolute value ``sqrt(x**2 + mu**2)``."""
    return sqrt(x * x + mu * mu)


def sum(x):  # noqa: A001 - mirrors numpy.sum for dual-aware code
    if isinstance(x, Dual):
        return x.sum()
    return np.sum(x)


def dot(a, b):
    if isinstance(a, Dual) and isinstance(b, Dual):
        return Dual(np.dot(a.value, b.value), np.dot(a.value, b.tangent) + np.dot(a.tangent, b.value))
    if isinstance(a, Dual):
        return Dual(np.dot(a.value, b), np.dot(a.tangent, b))
    if isinstance(b, Dual):
        return Dual(np.dot(a, b.value), np.dot(a, b.tangent))
    return np.dot(a, b)


def value_and_directional(f, x, p) -> tuple[float, float]:
    """Evaluate ``f(x)`` and ``p @ grad f(x)`` in one dual pass."""
    x = np.asarray(x, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if x.shape != p.shape:
        raise ValueError(f"point and direction shapes differ: {x.shape} vs {p.shape}")
    out = f(Dual(x, p))
    if not isinstance(out, Dual):
        # f does not depend on x
        return float(out), 0.0
    return float(out.value), float(out.tangent)


def directional_derivative(f, x, p) -> float:
    """Exact ``p @ grad f(x)`` from a single dual evaluation of ``f``."""
    return value_and_directional(f, x, p)[1]
