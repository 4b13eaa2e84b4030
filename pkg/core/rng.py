"""Seeded random streams.

All randomness goes through Philox4x64 (counter-based, portable). A stream is
keyed by the experiment seed plus a purpose label; per-item streams differ
only in the high counter word, so item k's draws never depend on how many
draws item k-1 consumed.
"""

from __future__ import annotations

import hashlib

import numpy as np

_KEY_BITS = 128


def derive_key(seed: int, *labels: str | int) -> int:
    """Hash a seed and labels into a 128-bit Philox key."""
    h = hashlib.sha256()
    h.update(str(int(seed)).encode("ascii"))
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode("utf-8"))
    return int.from_bytes(h.digest()[: _KEY_BITS // 8], "little")


def stream(seed: int, *labels: str | int) -> np.random.Generator:
    """Generator for a named purpose under a seed."""
    return np.random.Generator(np.random.Philox(key=derive_key(seed, *labels)))


def item_stream(seed: int, label: str, index: int) -> np.random.Generator:
    """Generator for item `index` of a labeled family (counter-based split)."""
    if index < 0:
        raise ValueError(f"item index must be non-negative, got {index}")
    counter = np.array([0, 0, 0, index], dtype=np.uint64)
    bitgen = np.random.Philox(key=derive_key(seed, label), counter=counter)
    return np.random.Generator(bitgen)


def seed_from_ids(seed: int, ids: list[str]) -> int:
    """64-bit seed derived from a seed and the sorted id list."""
    key = derive_key(seed, *sorted(ids))
    return key & 0xFFFF_FFFF_FFFF_FFFF
