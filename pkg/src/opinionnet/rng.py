"""Seeded random streams.

Every random draw in a run comes from a stream keyed by a fixed tuple under
the run's master seed::

    (0, purpose)              initialization (graph, archetypes, opinions, weights)
    (1, t, phase)             phase-level block for step t
    (1, t, phase, agent)      per-agent stream (custom policies only)

Keys are passed as ``SeedSequence.spawn_key`` so streams are independent of
one another and of the order in which they are requested.
"""

from __future__ import annotations

import numpy as np

INIT = 0
STEP = 1

# init purposes
GRAPH = 0
ARCHETYPES = 1
OPINIONS = 2
WEIGHTS = 3

# step phases
CHOOSE = 0
UPDATE = 2
GROW = 3

MAX_SEED = 2**64 - 1


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for ``key`` under master ``seed``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit integer seed derived from ``key``, for APIs that take plain ints."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])
