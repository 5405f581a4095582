"""Stream-keyed, counter-based random number generation.

Every stochastic routine in this package draws from a Philox generator keyed
by ``(master_seed, *stream)``. Replication ``r`` of an experiment uses the
stream ``(master_seed, r)``, so serial and parallel runs see exactly the same
draws and any single replication can be reproduced in isolation.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError

__all__ = ["stream_generator", "seed_key"]


def seed_key(seed) -> tuple[int, ...]:
    """Normalize a seed argument (int or tuple of ints) to a key tuple."""
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    try:
        key = tuple(int(s) for s in seed)
    except TypeError:
        raise ParameterError(f"seed must be an integer or a tuple of integers, got {seed!r}")
    if not key:
        raise ParameterError("seed key must not be empty")
    return key


def stream_generator(seed, *stream: int) -> np.random.Generator:
    """Return the Generator for the Philox stream keyed by ``(seed, *stream)``.

    ``seed`` may itself be a tuple, in which case the stream indices are
    appended to it; the full key identifies the stream uniquely.
    """
    key = seed_key(seed) + tuple(int(s) for s in stream)
    if any(k < 0 for k in key):
        raise ParameterError("seed and stream indices must be non-negative")
    seq = np.random.SeedSequence(key[0], spawn_key=key[1:])
    return np.random.Generator(np.random.Philox(seq))
