"""Replica-deterministic record hashing shared by the index and the batch bitmaps."""

from __future__ import annotations

import numpy as np

from ._backend import BACKEND, hash_bytes, hash_keys

__all__ = ["BACKEND", "DEFAULT_SEED", "hash_bytes", "hash_keys", "slot_of", "slots_of_keys"]

DEFAULT_SEED = 0x5EED


def slot_of(key: bytes, size: int, seed: int = DEFAULT_SEED) -> int:
    return hash_bytes(key, seed) % size


def slots_of_keys(keys: np.ndarray, size: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Vectorized ``slot_of`` for integer keys (8-byte little-endian encoding)."""
    return (hash_keys(keys, seed) % np.uint64(size)).astype(np.int64)
