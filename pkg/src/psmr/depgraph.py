"""CBASE baseline: an explicit dependency graph built by pairwise comparison.

Every operation runs under one graph-wide guard. The same graph, with
batches as vertices and bitmap intersection as the conflict test, backs the
batch baseline.
"""

from __future__ import annotations

import heapq
import threading
from typing import Callable, Generic, Hashable, Iterable, Optional, TypeVar

from .model import SchedulerError, Transaction

V = TypeVar("V")


def conflicts(a: Transaction, b: Transaction) -> bool:
    return not a.record_set.isdisjoint(b.record_set)


class DependencyGraph(Generic[V]):
    """DAG of pending vertices; an edge (u, v) means u precedes v and they conflict.

    ``insert`` compares the new vertex against every pending one, so each
    insert costs one comparison per pending vertex (counted in
    ``comparisons``; edges found go to ``conflicts_found``). ``get`` hands
    out the lowest-keyed vertex with no pending predecessor.
    """

    def __init__(
        self,
        conflict: Callable[[V, V], bool] = conflicts,
        key: Callable[[V], Hashable] = lambda v: v.seq,
    ):
        self.conflict = conflict
        self.key = key
        self.guard = threading.Condition(threading.Lock())
        self.comparisons = 0
        self.conflicts_found = 0
        self.max_size = 0
        self.closed = False
        self._pending: dict = {}
        self._succ: dict = {}
        self._indeg: dict = {}
        self._ready: list = []
        self._executing: set = set()
        self._last = None

    def __len__(self):
        return len(self._pending)

    def insert(self, v: V) -> None:
        k = self.key(v)
        with self.guard:
            if k in self._pending or (self._last is not None and k <= self._last):
                raise SchedulerError(f"vertex {k} inserted out of order or twice")
            self._last = k
            indeg = 0
            conflict = self.conflict
            self.comparisons += len(self._pending)
            for pk, pv in self._pending.items():
                if conflict(pv, v):
                    self._succ[pk].append(k)
                    indeg += 1
            self.conflicts_found += indeg
            self._pending[k] = v
            self._succ[k] = []
            self._indeg[k] = indeg
            if len(self._pending) > self.max_size:
                self.max_size = len(self._pending)
            if indeg == 0:
                heapq.heappush(self._ready, k)
                self.guard.notify()

    def get(self, block: bool = False, timeout: Optional[float] = None) -> Optional[V]:
        """Claim a free vertex, or None (also returned once the graph is closed)."""
        with self.guard:
            if block:
                self.guard.wait_for(lambda: self._ready or self.closed, timeout)
            if not self._ready:
                return None
            k = heapq.heappop(self._ready)
            self._executing.add(k)
            return self._pending[k]

    def remove(self, v: V) -> None:
        k = self.key(v)
        with self.guard:
            if k not in self._executing:
                raise SchedulerError(f"vertex {k} is not executing")
            self._executing.discard(k)
            del self._pending[k]
            del self._indeg[k]
            freed = 0
            for s in self._succ.pop(k):
                self._indeg[s] -= 1
                if self._indeg[s] == 0:
                    heapq.heappush(self._ready, s)
                    freed += 1
            if freed:
                self.guard.notify(freed)

    def close(self) -> None:
        with self.guard:
            self.closed = True
            self.guard.notify_all()

    def edges(self) -> set[tuple]:
        with self.guard:
            return {(u, w) for u, ws in self._succ.items() for w in ws}

    def free_keys(self) -> list:
        with self.guard:
            return sorted(self._ready)


class CBaseScheduler(DependencyGraph[Transaction]):
    """Per-transaction CBASE: workers loop on ``get``, execute, ``remove``."""

    kind = "cbase"

    def __init__(self):
        super().__init__(conflicts, lambda t: t.seq)


def pairwise_edges(txns: Iterable[Transaction], conflict=conflicts) -> set[tuple[int, int]]:
    """All (earlier, later) conflicting seq pairs, by brute force."""
    ts = sorted(txns, key=lambda t: t.seq)
    return {
        (a.seq, b.seq)
        for i, a in enumerate(ts)
        for b in ts[i + 1 :]
        if conflict(a, b)
    }


def transitive_reduction(edges: set[tuple]) -> set[tuple]:
    succ: dict = {}
    for u, v in edges:
        succ.setdefault(u, set()).add(v)

    def reachable(u, target, skip):
        stack = [w for w in succ.get(u, ()) if (u, w) != skip]
        seen = set()
        while stack:
            w = stack.pop()
            if w == target:
                return True
            if w not in seen:
                seen.add(w)
                stack.extend(succ.get(w, ()))
        return False

    return {(u, v) for u, v in edges if not reachable(u, v, (u, v))}
