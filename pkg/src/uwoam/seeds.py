"""Seed derivation tree.

Every stochastic draw in the package is reached from one integer seed plus a
tuple of integer keys, through numpy's ``SeedSequence``.  Streams with
different keys are statistically independent and need no coordination, so
frames can be rendered in any order or in parallel.
"""
from __future__ import annotations

import numpy as np

# key namespaces, so that e.g. frame 3's tilt never collides with screen 3
TILT = 1
SCREEN = 2
DETECTOR = 3
CHANNEL = 4


def rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


def derive_seed(seed: int, *keys: int) -> int:
    """A 64-bit child seed; stable across platforms and numpy versions."""
    state = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)
