"""Counter-based random streams.

Every (seed, lane, major, minor) cell owns an independent Philox stream, so
draws are a pure function of those four integers regardless of the order in
which cells are consumed.  ``major``/``minor`` are typically (trial, step).
"""

from __future__ import annotations

import numpy as np

PATH_LANE = 0
EMULATION_LANE = 1

_U64 = 2**64


def substream(seed: int, lane: int, major: int, minor: int) -> np.random.Generator:
    """Generator for one cell of a seeded run."""
    if not 0 <= seed < _U64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    if major < 0 or minor < 0:
        raise ValueError("stream indices must be nonnegative")
    key = np.array([seed, lane], dtype=np.uint64)
    # Low word free-runs as values are drawn; major/minor live in the high words.
    counter = np.array([0, minor % _U64, major % _U64, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))
