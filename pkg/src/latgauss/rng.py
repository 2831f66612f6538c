"""Seeded random streams.

All randomness flows through counter-based Philox generators keyed by
(master seed, *path), so concurrent or reordered trials reproduce bit
identically: the stream for trial k never depends on how many draws trial
k-1 made.
"""

import numpy as np


def stream(seed, *path):
    """An independent Generator for the given seed and derivation path."""
    if seed is None:
        raise ValueError("seed must be an integer, got None")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(seed=ss))
