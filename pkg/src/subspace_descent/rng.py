"""Seedable, splittable random streams.

Each stream is keyed by ``(seed, stream_id)`` and backed by the counter-based
Philox generator, so replicate ``i`` of an experiment can draw from stream
``i`` without any coordination between workers.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


class RngStream:
    """Reproducible source of standard normal and uniform-integer variates.

    Parameters
    ----------
    seed : int
        Base seed (reduced modulo 2**64).
    stream_id : int, default=0
        Stream index. Distinct ids under the same seed give independent
        sequences; identical ``(seed, stream_id)`` pairs give bit-identical
        sequences.

    Notes
    -----
    A stream is single-owner. Share the ``(seed, stream_id)`` pair across
    threads, never the instance.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.Philox(ss))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def spawn(self, stream_id: int) -> "RngStream":
        """Return a sibling stream under the same seed."""
        return RngStream(self.seed, stream_id)

    def standard_normal(self, size=None) -> np.ndarray:
        return self._gen.standard_normal(size)

    def integers(self, low: int, high: int, size=None):
        """Uniform integers on ``[low, high)``."""
        return self._gen.integers(low, high, size=size)

    @property
    def generator(self) -> np.random.Generator:
        """Underlying numpy generator, for batched draws."""
        return self._gen


def as_stream(rng) -> RngStream:
    """Coerce ``None``, an int seed, or an :class:`RngStream` to a stream."""
    if isinstance(rng, RngStream):
        return rng
    if rng is None:
        return RngStream(np.random.SeedSequence().entropy & _MASK64)
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng))
    raise TypeError(f"cannot build an RngStream from {type(rng).__name__}")
