"""Seeded random-number generation.

All stochastic operations in this package take either an explicit integer
seed or a ready-made ``numpy.random.Generator``.  Generators are PCG64
(numpy's default), so every result is bit-reproducible given the seed.
Operations that need several independent streams derive them from
``substream(seed, *path)`` so the streams do not depend on evaluation
order or worker count.
"""

from __future__ import annotations

import numpy as np

__all__ = ["as_generator", "substream"]


def as_generator(seed: int | np.random.Generator) -> np.random.Generator:
    """Return a PCG64 generator; pass through if one is given."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an int or Generator, got {type(seed).__name__}")
    return np.random.default_rng(int(seed))


def substream(seed: int, *path: int) -> np.random.Generator:
    """Derive an independent, reproducible stream from (seed, *path)."""
    return np.random.default_rng([int(seed), *[int(p) for p in path]])
