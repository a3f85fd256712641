"""Seedable, splittable random streams."""

from dataclasses import dataclass

import numpy as np

_U64 = 1 << 64


@dataclass(frozen=True)
class RngSeed:
    """A (seed, stream_id) pair naming one reproducible random stream.

    ``generator(i, j, ...)`` derives independent child streams, so work items
    can draw from their own stream regardless of execution order.
    """

    seed: int = 42
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not 0 <= v < _U64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v}")

    def generator(self, *path):
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *map(int, path)))
        return np.random.Generator(np.random.PCG64(ss))

    def stream(self, stream_id):
        return RngSeed(self.seed, stream_id)
