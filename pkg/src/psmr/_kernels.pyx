# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Mirrors ``psmr._fallback`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t, uint8_t
from libc.stdlib cimport calloc, free

cnp.import_array()

NAME = "cython"

cdef uint64_t FNV_OFFSET = 0xCBF29CE484222325ULL
cdef uint64_t FNV_PRIME = 0x100000001B3ULL


cdef inline uint64_t _fmix64(uint64_t k) nogil:
    k ^= k >> 33
    k *= 0xFF51AFD7ED558CCDULL
    k ^= k >> 33
    k *= 0xC4CEB9FE1A85EC53ULL
    k ^= k >> 33
    return k


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int _popcount(uint64_t x) nogil:
    return __builtin_popcountll(x)


def fmix64(k):
    return _fmix64(<uint64_t>(k & 0xFFFFFFFFFFFFFFFF))


def hash_bytes(bytes data not None, seed):
    cdef const unsigned char *p = data
    cdef Py_ssize_t i, n = len(data)
    cdef uint64_t h = FNV_OFFSET ^ _fmix64(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF))
    for i in range(n):
        h = (h ^ p[i]) * FNV_PRIME
    return _fmix64(h)


def hash_keys(keys, seed):
    cdef const uint64_t[::1] k = np.ascontiguousarray(keys, dtype=np.uint64)
    cdef Py_ssize_t n = k.shape[0], i
    cdef int j
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef uint64_t base = FNV_OFFSET ^ _fmix64(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF))
    cdef uint64_t h, x
    with nogil:
        for i in range(n):
            h = base
            x = k[i]
            for j in range(8):
                h = (h ^ ((x >> (8 * j)) & 0xFF)) * FNV_PRIME
            o[i] = _fmix64(h)
    return out


def window_collisions(slots, Py_ssize_t q, Py_ssize_t nslots):
    cdef const int64_t[::1] s = np.ascontiguousarray(slots, dtype=np.int64)
    cdef Py_ssize_t n = s.shape[0], i
    cdef long long total = 0
    if n <= q:
        return 0
    cdef int64_t *counts = <int64_t *> calloc(nslots, sizeof(int64_t))
    if counts == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                if i >= q:
                    total += counts[s[i]]
                    counts[s[i - q]] -= 1
                counts[s[i]] += 1
    finally:
        free(counts)
    return total


def batch_window_conflicts(slots2d, Py_ssize_t w, Py_ssize_t start, Py_ssize_t nslots):
    cdef const int64_t[:, ::1] s = np.ascontiguousarray(slots2d, dtype=np.int64)
    cdef Py_ssize_t nb = s.shape[0], m = s.shape[1]
    if nb <= start or w <= 0:
        return 0
    cdef Py_ssize_t words = (w + 63) // 64
    cdef Py_ssize_t b, j, k, ring, word, old
    cdef uint64_t bit
    cdef long long total = 0
    cdef uint64_t *masks = <uint64_t *> calloc(nslots * words, sizeof(uint64_t))
    cdef uint64_t *acc = <uint64_t *> calloc(words, sizeof(uint64_t))
    if masks == NULL or acc == NULL:
        free(masks)
        free(acc)
        raise MemoryError()
    try:
        with nogil:
            for b in range(nb):
                ring = b % w
                word = ring // 64
                bit = (<uint64_t> 1) << (ring % 64)
                if b >= start:
                    for k in range(words):
                        acc[k] = 0
                    for j in range(m):
                        for k in range(words):
                            acc[k] |= masks[s[b, j] * words + k]
                    for k in range(words):
                        total += _popcount(acc[k])
                if b >= w:
                    old = b - w
                    for j in range(m):
                        masks[s[old, j] * words + word] &= ~bit
                for j in range(m):
                    masks[s[b, j] * words + word] |= bit
    finally:
        free(masks)
        free(acc)
    return total
