"""Seeded, counter-based random streams.

Every random draw in the package goes through :func:`substream`, which hashes
``(seed, purpose, trial)`` into a Philox key.  Two calls with the same triple
return generators producing identical streams, independent of call order or
thread scheduling.
"""

from __future__ import annotations

import hashlib
import os
from typing import Union

import numpy as np

SeedLike = Union[int, np.random.Generator]

_MASK64 = (1 << 64) - 1
SEED_ENV_VAR = "HARDNESSLAB_SEED"


def _tag_words(purpose: str) -> list[int]:
    digest = hashlib.blake2b(purpose.encode("utf-8"), digest_size=8).digest()
    word = int.from_bytes(digest, "little")
    return [word & 0xFFFFFFFF, word >> 32]


def substream(seed: int, purpose: str = "", trial: int = 0) -> np.random.Generator:
    """Generator for trial ``trial`` of stream ``purpose`` under ``seed``."""
    if seed < 0 or trial < 0:
        raise ValueError("seed and trial must be nonnegative")
    seed = int(seed) & _MASK64
    entropy = [seed & 0xFFFFFFFF, seed >> 32, *_tag_words(purpose), int(trial)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def as_generator(seed: SeedLike, purpose: str = "", trial: int = 0) -> np.random.Generator:
    """Pass generators through untouched; turn integer seeds into a substream."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (int, np.integer)) and not isinstance(seed, bool):
        return substream(int(seed), purpose, trial)
    raise TypeError(f"seed must be an int or numpy Generator, got {type(seed).__name__}")


def child_seed(seed: int, purpose: str, trial: int = 0) -> int:
    """Derive a 64-bit integer seed, for APIs that take ints rather than generators."""
    return int(substream(seed, purpose, trial).integers(0, 2**63 - 1))


def default_seed(fallback: int = 0) -> int:
    """Seed from the ``HARDNESSLAB_SEED`` environment variable, else ``fallback``."""
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw.strip() == "":
        return fallback
    return int(raw)
