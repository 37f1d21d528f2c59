"""Seed derivation.

Every random stream is keyed by a path of integers below one master seed
(trial index, SU index, ...), so streams never depend on how many other
streams were drawn before them or on worker scheduling.
"""

from __future__ import annotations

import random

import numpy as np


def seed_sequence(seed, *key: int) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(key))
    return np.random.SeedSequence(int(seed), spawn_key=tuple(key))


def py_random(seed, *key: int) -> random.Random:
    state = seed_sequence(seed, *key).generate_state(2, np.uint64)
    return random.Random((int(state[0]) << 64) | int(state[1]))
