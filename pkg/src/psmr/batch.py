"""batchCBASE baseline: fixed-size batches compared through per-batch bitmaps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import mpmath
import numpy as np

from .depgraph import DependencyGraph
from .hashing import DEFAULT_SEED, hash_bytes
from .model import Transaction

DEFAULT_BITMAP_SIZE = 1_024_000
DEFAULT_BATCH_SIZE = 200


@dataclass(eq=False)
class Batch:
    """Consecutive transactions scheduled as one vertex.

    ``bitmap`` is an int whose bit k is set iff a member touches a record
    hashing to k modulo ``bitmap_size``.
    """

    id: int
    members: list[Transaction]
    bitmap_size: int = DEFAULT_BITMAP_SIZE
    seed: int = DEFAULT_SEED
    bitmap: int = field(init=False, repr=False)

    def __post_init__(self):
        if not self.members:
            raise ValueError("empty batch")
        seqs = [t.seq for t in self.members]
        if seqs != list(range(seqs[0], seqs[0] + len(seqs))):
            raise ValueError("batch members must be a contiguous seq range")
        self.bitmap = build_bitmap(
            (r for t in self.members for r in t.records), self.bitmap_size, self.seed
        )

    @property
    def seq(self) -> int:
        return self.id

    def bits(self) -> set[int]:
        return {i for i, c in enumerate(reversed(bin(self.bitmap)[2:])) if c == "1"}


def build_bitmap(records: Iterable[bytes], size: int, seed: int = DEFAULT_SEED) -> int:
    buf = bytearray((size + 7) // 8)
    for r in records:
        k = hash_bytes(r, seed) % size
        buf[k >> 3] |= 1 << (k & 7)
    return int.from_bytes(buf, "little")


def batch_conflicts(a: Batch, b: Batch) -> bool:
    if a.bitmap_size != b.bitmap_size or a.seed != b.seed:
        raise ValueError("bitmaps built with different size or seed")
    return (a.bitmap & b.bitmap) != 0


def pack(
    txns: Iterable[Transaction],
    m: int = DEFAULT_BATCH_SIZE,
    bitmap_size: int = DEFAULT_BITMAP_SIZE,
    seed: int = DEFAULT_SEED,
) -> Iterator[Batch]:
    """Group consecutive transactions ``m`` at a time; the tail batch may be short."""
    if m < 1:
        raise ValueError("batch size must be >= 1")
    members: list[Transaction] = []
    bid = 0
    for t in txns:
        members.append(t)
        if len(members) == m:
            yield Batch(bid, members, bitmap_size, seed)
            bid += 1
            members = []
    if members:
        yield Batch(bid, members, bitmap_size, seed)


class BatchScheduler(DependencyGraph[Batch]):
    kind = "batch"

    def __init__(self):
        super().__init__(batch_conflicts, lambda b: b.id)


def log_analytic_batch_conflict_rate(n: int, m: int) -> float:
    """Natural log of sum_{i=1..m} C(n,i) (i/n)^m ((n-i)/n)^m, computed in log space."""
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    terms = []
    lgn = math.lgamma(n + 1)
    for i in range(1, m + 1):
        if i == n:
            continue  # ((n - i)/n)^m == 0
        terms.append(
            lgn
            - math.lgamma(i + 1)
            - math.lgamma(n - i + 1)
            + m * math.log(i / n)
            + m * math.log1p(-i / n)
        )
    if not terms:
        return -math.inf
    top = max(terms)
    return top + math.log(math.fsum(math.exp(t - top) for t in terms))


def analytic_batch_conflict_rate(n: int, m: int) -> mpmath.mpf:
    """The batch conflict formula as printed; grows past float range for large m.

    Not a probability in general: at m=1 it equals (n-1)/n, and it exceeds 1
    for most m >= 2.
    """
    return mpmath.exp(mpmath.mpf(log_analytic_batch_conflict_rate(n, m)))


def occupancy_batch_conflict_probability(n: int, m: int) -> float:
    """Exact probability that two batches of m uniform draws from n records share one.

    Sums over the distinct-record count k of the first batch:
    P(disjoint) = sum_k P(K=k) ((n-k)/n)^m.
    """
    dist = np.zeros(m + 1)
    dist[0] = 1.0
    for _ in range(m):
        nxt = np.zeros(m + 1)
        k = np.arange(m + 1)
        nxt[:] += dist * (k / n)
        nxt[1:] += dist[:-1] * ((n - k[:-1]) / n)
        dist = nxt
    k = np.arange(m + 1)
    disjoint = float(np.sum(dist * np.exp(m * np.log1p(-k / n))))
    return 1.0 - disjoint


def monte_carlo_two_batch_rate(n: int, m: int, trials: int, seed: int = 0) -> float:
    """Fraction of random batch pairs (m uniform records each from n) that share a record."""
    rng = np.random.default_rng(seed)
    a = rng.integers(0, n, size=(trials, m))
    b = rng.integers(0, n, size=(trials, m))
    rows = np.arange(trials, dtype=np.int64)[:, None] * n
    ca = np.unique((a + rows).ravel())
    cb = np.unique((b + rows).ravel())
    common = np.intersect1d(ca, cb, assume_unique=True)
    return np.unique(common // n).shape[0] / trials
