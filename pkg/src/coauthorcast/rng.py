"""Seed derivation.

Every stochastic stage draws from ``numpy.random.PCG64`` streams whose seeds
are derived by hashing a master seed with string/integer keys, so results do
not depend on evaluation order or worker count.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def _key_words(key) -> list[int]:
    if isinstance(key, (int, np.integer)):
        value = int(key) & MASK64
    else:
        digest = hashlib.blake2b(str(key).encode("utf-8"), digest_size=8).digest()
        value = int.from_bytes(digest, "little")
    return [value & 0xFFFFFFFF, value >> 32]


def derive_seed(master: int, *keys) -> int:
    """Return a 64-bit seed deterministically derived from ``master`` and ``keys``."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(master & MASK64).to_bytes(8, "little"))
    for key in keys:
        h.update(b"\x1f")
        h.update(str(key).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def substream(master: int, *keys) -> np.random.Generator:
    """Independent generator for the substream indexed by ``keys``."""
    entropy = _key_words(master)
    spawn_key = []
    for key in keys:
        spawn_key.extend(_key_words(key))
    seq = np.random.SeedSequence(entropy=entropy, spawn_key=tuple(spawn_key))
    return np.random.Generator(np.random.PCG64(seq))
