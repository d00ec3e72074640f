"""Deterministic RNG derivation.

All randomness in the package flows through numpy's PCG64 seeded from a
64-bit user seed via ``SeedSequence``.  Sub-streams are derived with
``derive(seed, *path)`` where ``path`` is a tuple of small integers or
strings naming the consumer, so independent components never share a
stream and runs are reproducible from the single seed.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key(part: int | str) -> int:
    if isinstance(part, int):
        return part & 0xFFFFFFFF
    return zlib.crc32(part.encode("utf-8"))


def derive(seed: int, *path: int | str) -> np.random.Generator:
    """Return a Generator for ``seed`` specialized by ``path``."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(_key(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))
