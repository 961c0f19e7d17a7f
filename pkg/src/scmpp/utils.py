"""Seed derivation and deterministic parallel mapping."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

ENV_SEED = "LDM_SEED"


def derive_rng(*keys: int) -> np.random.Generator:
    """Independent, reproducible RNG stream for a (seed, stage, index...) path.

    Streams derived from distinct key tuples are statistically independent,
    so parallel and serial execution orders see identical draws.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(keys))))


def default_seed(explicit: int | None) -> int:
    """Explicit seed, else the LDM_SEED environment variable, else 1."""
    if explicit is not None:
        return int(explicit)
    env = os.environ.get(ENV_SEED)
    if env is not None:
        return int(env)
    return 1


def parallel_map(fn, items, num_cores: int = 1, chunksize: int = 1):
    """Ordered map over items, optionally across processes.

    The reduction is deterministic: results come back in input order and
    every task must derive its own randomness from explicit per-item seeds,
    so worker count never changes the output.
    """
    items = list(items)
    if num_cores <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(num_cores, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
