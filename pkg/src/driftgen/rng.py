"""Deterministic RNG substreams.

All randomness in the package flows from one master seed. Substreams are
keyed by names (table, column, phase, ...) so that per-column or per-phase
generation is independent of execution order and reproducible.
"""

from __future__ import annotations

import hashlib

import numpy as np


def key_digest(part: object) -> int:
    return int.from_bytes(hashlib.sha256(repr(part).encode()).digest()[:8], "little")


def substream(seed: int, *key: object) -> np.random.Generator:
    """Generator for the substream identified by (seed, *key)."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [key_digest(part) for part in key]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def as_generator(seed) -> np.random.Generator:
    """Accept either an integer seed or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return substream(int(seed))
