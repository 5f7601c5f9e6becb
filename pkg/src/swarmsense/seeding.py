"""Deterministic RNG stream derivation.

Every randomized stage gets its own numpy Generator derived from the master
seed plus stable string/int tags, so stages can't perturb each other and
identical configs reproduce bit-identical runs on any platform.
"""

from __future__ import annotations

import zlib

import numpy as np


def _tag_to_int(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag) & 0xFFFFFFFF
    return zlib.crc32(str(tag).encode("utf-8"))


def rng_for(seed: int, *tags) -> np.random.Generator:
    """Generator for (seed, tags); same arguments always give the same stream."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_tag_to_int(t) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def sign_for(seed: int, *tags) -> int:
    """Deterministic +1/-1 derived from (seed, tags); used to break exact ties."""
    h = zlib.crc32(repr((int(seed),) + tuple(str(t) for t in tags)).encode("utf-8"))
    return 1 if h & 1 else -1
