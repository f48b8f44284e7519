"""Index-based scheduler: a single-hash Bloom filter whose slots hold FIFO queues.

Every record hashes to one slot. A slot's queue holds, in seq order, the
pending transactions touching any record mapped there, so the union of the
queues is a dependency graph that keeps only adjacent edges. A transaction
is free once it heads every queue it sits in.

Insert and remove are written as step generators. ``insert_and_get`` and
``remove_and_get`` drive them with real slot locks; ``psmr.interleave``
drives the very same generators one shared-memory step at a time to
enumerate interleavings.
"""

from __future__ import annotations

import csv
import io
import threading
from collections import deque
from typing import Callable, Iterator, Optional

from .hashing import DEFAULT_SEED, hash_bytes
from .model import SchedulerError, Transaction

DEFAULT_SIZE = 1_024_000

ACQUIRE = "acquire"
RELEASE = "release"


class Slot:
    __slots__ = ("index", "queue", "lock")

    def __init__(self, index: int):
        self.index = index
        self.queue: deque[Entry] = deque()
        self.lock = threading.Lock()

    def head(self) -> Optional["Entry"]:
        try:
            return self.queue[0]
        except IndexError:
            return None


class Entry:
    """Per-scheduler wrapper of a transaction: its slots and its run flag."""

    __slots__ = ("txn", "slots", "run", "_guard")

    def __init__(self, txn: Transaction, slots: tuple[Slot, ...]):
        self.txn = txn
        self.slots = slots
        self.run = True
        self._guard = threading.Lock()

    def claim(self) -> bool:
        """Atomic false -> true transition of ``run``; only one caller ever wins."""
        if self.run or not self._guard.acquire(blocking=False):
            return False
        self.run = True
        return True

    @property
    def claimed(self) -> bool:
        return self._guard.locked()

    def __repr__(self):
        return f"Entry({self.txn!r}, run={self.run})"


class IndexScheduler:
    """Concurrent scheduler over ``size`` hashed slots.

    ``insert_and_get`` must be called by a single thread in seq order;
    ``remove_and_get`` may be called concurrently for distinct finished
    transactions. Ready transactions are handed to ``sink``.
    """

    kind = "fast"

    def __init__(
        self,
        size: int = DEFAULT_SIZE,
        seed: int = DEFAULT_SEED,
        sink: Optional[Callable[[Transaction], None]] = None,
        trace: bool = False,
        debug: bool = False,
    ):
        if size < 1:
            raise ValueError("size must be positive")
        self.size = size
        self.seed = seed
        self.sink = sink if sink is not None else deque().append
        self._slots: list[Optional[Slot]] = [None] * size
        self._entries: dict[int, Entry] = {}
        self._last_seq = -1
        self._dispatched = 0
        self._tally = threading.Lock()
        self._trace: Optional[list[tuple]] = [] if trace else None
        self._debug = debug
        self._held = threading.local()
        self.comparisons = 0

    # -- index ---------------------------------------------------------------

    def slot_index(self, record: bytes) -> int:
        return hash_bytes(record, self.seed) % self.size

    def _slot(self, i: int) -> Slot:
        s = self._slots[i]
        if s is None:
            # only the inserting thread creates slots
            s = self._slots[i] = Slot(i)
        return s

    def slots_for(self, txn: Transaction) -> tuple[Slot, ...]:
        """Distinct slots of ``txn`` in canonical record order."""
        idx = dict.fromkeys(self.slot_index(r) for r in txn.records)
        return tuple(self._slot(i) for i in idx)

    def entry(self, seq: int) -> Entry:
        return self._entries[seq]

    def new_entry(self, txn: Transaction) -> Entry:
        if txn.seq <= self._last_seq or txn.seq in self._entries:
            raise SchedulerError(f"seq {txn.seq} inserted out of order or twice")
        self._last_seq = txn.seq
        e = Entry(txn, self.slots_for(txn))
        self._entries[txn.seq] = e
        return e

    # -- insert / remove steps -----------------------------------------------------

    def free_steps(self, e: Entry) -> Iterator:
        """Lock-free check that ``e`` heads every one of its slot queues."""
        n = len(e.slots)
        i = 0
        while i < n:
            yield None
            if e.slots[i].head() is not e:
                return False
            i += 1
        return True

    def insert_steps(self, e: Entry) -> Iterator:
        n = len(e.slots)
        ready = False
        i = 0
        while i < n:
            slot = e.slots[i]
            yield ACQUIRE, slot
            slot.queue.append(e)
            self._event("insert", e, slot)
            if i == n - 1:
                # run is lowered before the free check so that a remover racing
                # with this check either sees run == False or its removal is
                # visible to the check; both sides then compete via claim().
                yield None
                e.run = False
                ready = yield from self.free_steps(e)
            yield RELEASE, slot
            i += 1
        yield None
        if ready and e.claim():
            self._emit(e)

    def remove_steps(self, e: Entry) -> Iterator:
        n = len(e.slots)
        i = 0
        while i < n:
            slot = e.slots[i]
            yield ACQUIRE, slot
            if slot.head() is not e:
                yield RELEASE, slot
                raise SchedulerError(f"{e.txn!r} is not at the head of slot {slot.index}")
            slot.queue.popleft()
            self._event("remove", e, slot)
            yield RELEASE, slot
            nxt = slot.head()
            if nxt is not None:
                yield None
                if not nxt.run:
                    ok = yield from self.free_steps(nxt)
                    if ok:
                        yield None
                        if nxt.claim():
                            self._emit(nxt, slot)
            i += 1

    # -- drivers ---------------------------------------------------------------

    def _drive(self, steps: Iterator) -> None:
        held = None
        try:
            for action in steps:
                if action is None:
                    continue
                kind, slot = action
                if kind is ACQUIRE:
                    slot.lock.acquire()
                    held = slot
                    if self._debug:
                        self._count_held(+1)
                else:
                    held = None
                    slot.lock.release()
                    if self._debug:
                        self._count_held(-1)
        finally:
            if held is not None:
                held.lock.release()
                if self._debug:
                    self._count_held(-1)

    def _count_held(self, delta: int) -> None:
        n = getattr(self._held, "n", 0) + delta
        self._held.n = n
        if n > 1:
            raise SchedulerError("more than one slot lock held by one thread")

    def free(self, txn: Transaction) -> bool:
        e = self._entries[txn.seq]
        steps = self.free_steps(e)
        try:
            while True:
                next(steps)
        except StopIteration as stop:
            return stop.value

    def insert_and_get(self, txn: Transaction) -> None:
        self._drive(self.insert_steps(self.new_entry(txn)))

    def remove_and_get(self, txn: Transaction) -> None:
        e = self._entries.get(txn.seq)
        if e is None:
            raise SchedulerError(f"{txn!r} was never inserted")
        self._drive(self.remove_steps(e))
        del self._entries[txn.seq]

    # -- dispatch & introspection ----------------------------------------------

    def _emit(self, e: Entry, slot: Optional[Slot] = None) -> None:
        with self._tally:
            self._dispatched += 1
        self._event("dispatch", e, slot)
        self.sink(e.txn)

    @property
    def dispatch_count(self) -> int:
        return self._dispatched

    def pending(self) -> set[int]:
        """Seqs currently held in any slot queue."""
        out = set()
        for s in self._slots:
            if s is not None:
                out.update(e.txn.seq for e in list(s.queue))
        return out

    def queue_seqs(self, record: bytes) -> list[int]:
        s = self._slots[self.slot_index(record)]
        return [] if s is None else [e.txn.seq for e in list(s.queue)]

    def _event(self, kind: str, e: Entry, slot: Optional[Slot]) -> None:
        if self._trace is not None:
            self._trace.append(
                (kind, e.txn.seq, -1 if slot is None else slot.index, threading.get_ident())
            )

    @property
    def events(self) -> list[tuple]:
        return list(self._trace or ())

    def events_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["event", "seq", "slot", "thread"])
        w.writerows(self.events)
        return buf.getvalue()
