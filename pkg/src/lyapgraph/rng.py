"""Seeded random streams.

Every stream is derived from the user seed and a fixed key, so results do
not depend on evaluation order or on how many workers run the blocks.
"""

from __future__ import annotations

import numpy as np

BLOCK = 4096
_PATH, _BLOCK = 0, 1


def _entropy(seed):
    if isinstance(seed, (tuple, list)):
        return [int(s) for s in seed]
    return int(seed)


def path_stream(seed, path: int, sub: int = 0) -> np.random.Generator:
    """Stream for one path; ``sub`` separates auxiliary sub-streams of that path."""
    ss = np.random.SeedSequence(_entropy(seed), spawn_key=(_PATH, int(path), int(sub)))
    return np.random.Generator(np.random.PCG64(ss))


def block_streams(seed, n_paths: int, block: int = BLOCK):
    """Yield ``(start, stop, rng)`` over fixed-size blocks of path indices."""
    for b, start in enumerate(range(0, n_paths, block)):
        ss = np.random.SeedSequence(_entropy(seed), spawn_key=(_BLOCK, b))
        yield start, min(start + block, n_paths), np.random.Generator(np.random.PCG64(ss))
