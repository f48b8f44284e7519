"""Pure Python / numpy implementations of the hot kernels.

Same signatures and results as the compiled ``_kernels`` module. The window
counters here use a sort-based formulation instead of the streaming loop the
compiled module runs, so the two backends check each other.
"""

from __future__ import annotations

import numpy as np

NAME = "python"

MASK64 = 0xFFFFFFFFFFFFFFFF
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fmix64(k: int) -> int:
    k &= MASK64
    k ^= k >> 33
    k = (k * 0xFF51AFD7ED558CCD) & MASK64
    k ^= k >> 33
    k = (k * 0xC4CEB9FE1A85EC53) & MASK64
    k ^= k >> 33
    return k


def hash_bytes(data: bytes, seed: int) -> int:
    """Seeded 64-bit hash: FNV-1a over ``data`` followed by a murmur3 finalizer."""
    h = FNV_OFFSET ^ fmix64(seed)
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & MASK64
    return fmix64(h)


def _fmix64_array(k: np.ndarray) -> np.ndarray:
    k = k ^ (k >> np.uint64(33))
    k = k * np.uint64(0xFF51AFD7ED558CCD)
    k = k ^ (k >> np.uint64(33))
    k = k * np.uint64(0xC4CEB9FE1A85EC53)
    return k ^ (k >> np.uint64(33))


def hash_keys(keys: np.ndarray, seed: int) -> np.ndarray:
    """Hash each integer key by its 8-byte little-endian encoding.

    Agrees with ``hash_bytes(int(k).to_bytes(8, "little"), seed)``.
    """
    k = np.asarray(keys, dtype=np.uint64)
    h = np.full(k.shape, FNV_OFFSET ^ fmix64(seed), dtype=np.uint64)
    prime = np.uint64(FNV_PRIME)
    low = np.uint64(0xFF)
    with np.errstate(over="ignore"):
        for i in range(8):
            h = (h ^ ((k >> np.uint64(8 * i)) & low)) * prime
        return _fmix64_array(h)


def window_collisions(slots: np.ndarray, q: int, nslots: int) -> int:
    """Sum over positions i >= q of how many of the previous q slots equal slots[i]."""
    s = np.asarray(slots, dtype=np.int64)
    n = s.shape[0]
    if n <= q:
        return 0
    idx = np.arange(n, dtype=np.int64)
    key = s * n + idx
    order = np.argsort(key, kind="stable")
    skey = key[order]
    pos = np.empty(n, dtype=np.int64)
    pos[order] = idx
    tail = idx[q:]
    lo = np.searchsorted(skey, s[q:] * n + (tail - q), side="left")
    return int((pos[q:] - lo).sum())


def batch_window_conflicts(slots2d: np.ndarray, w: int, start: int, nslots: int) -> int:
    """Count (b', b) pairs with start <= b, b - w <= b' < b, sharing any slot."""
    s = np.asarray(slots2d, dtype=np.int64)
    nb, m = s.shape
    if nb <= start or w <= 0:
        return 0
    batch = np.repeat(np.arange(nb, dtype=np.int64), m)
    key = np.unique(s.ravel() * nb + batch)
    slot = key // nb
    b = key - slot * nb
    lo = np.searchsorted(key, slot * nb + np.maximum(b - w, 0), side="left")
    pos = np.arange(key.shape[0], dtype=np.int64)
    sel = b >= start
    lo, pos, b = lo[sel], pos[sel], b[sel]
    counts = pos - lo
    total = int(counts.sum())
    if total == 0:
        return 0
    first = np.cumsum(counts) - counts
    offsets = np.arange(total, dtype=np.int64) - np.repeat(first, counts)
    pred = (key[np.repeat(lo, counts) + offsets]) % nb
    later = np.repeat(b, counts)
    return int(np.unique(later * (w + 1) + (later - pred)).shape[0])
