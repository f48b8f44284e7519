"""Exhaustive interleaving exploration of the index scheduler.

One inserter thread inserts a fixed list of transactions in seq order while
``removers`` threads take dispatched transactions (FIFO) and remove them.
The scheduler's own step generators are advanced one shared-memory action
at a time; slot locks are modelled so a thread waiting for a held lock is
disabled. Depth-first search with replay visits every reachable state once
(states are keyed by queue contents, run flags, lock owners, dispatch
counts and each thread's generator frames). Step generators must delegate
with ``yield from`` so nested frames are visible to the state key.

A run fails if some transaction is dispatched twice, dispatched while not
free, or if no thread can move before every transaction has been removed
(a lost wake-up).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .index import ACQUIRE, Entry, IndexScheduler, Slot
from .model import Command, SchedulerError, Transaction


def _txn(seq: int, *records: bytes) -> Transaction:
    return Transaction(seq, tuple(Command.put(r, b"v") for r in records))


# three transactions sharing records; x and y land in distinct slots at size 1024
SCENARIOS = {
    "x|xy|y": (_txn(0, b"x"), _txn(1, b"x", b"y"), _txn(2, b"y")),
    "xy|xy|xy": (_txn(0, b"x", b"y"), _txn(1, b"x", b"y"), _txn(2, b"x", b"y")),
    "x|y|xy": (_txn(0, b"x"), _txn(1, b"y"), _txn(2, b"x", b"y")),
    "xy|x|y": (_txn(0, b"x", b"y"), _txn(1, b"x"), _txn(2, b"y")),
}


@dataclass
class ExploreResult:
    states: int = 0
    terminals: int = 0
    failures: list[str] = field(default_factory=list)
    # choice sequence reproducing the first failure
    witness: Optional[tuple[int, ...]] = None

    @property
    def ok(self) -> bool:
        return not self.failures


def _canon(v):
    if isinstance(v, Entry):
        return ("E", v.txn.seq)
    if isinstance(v, Slot):
        return ("S", v.index)
    if isinstance(v, (bool, int, str, type(None))):
        return v
    if isinstance(v, tuple):
        return tuple(_canon(x) for x in v)
    return type(v).__name__


def _frames(gen) -> tuple:
    out = []
    while gen is not None and getattr(gen, "gi_frame", None) is not None:
        f = gen.gi_frame
        loc = tuple(sorted((k, _canon(v)) for k, v in f.f_locals.items() if k != "self"))
        out.append((gen.gi_code.co_name, f.f_lasti, loc))
        gen = gen.gi_yieldfrom
    return tuple(out)


class _Thread:
    __slots__ = ("gen", "waiting", "ops", "label")

    def __init__(self, label: str):
        self.label = label
        self.gen = None
        self.waiting: Optional[Slot] = None
        self.ops = 0


class _Sim:
    def __init__(self, txns, removers, make_scheduler):
        self.txns = list(txns)
        self.sink: list[Transaction] = []
        self.dispatch_counts = {t.seq: 0 for t in self.txns}
        self.failure: Optional[str] = None
        self.sched: IndexScheduler = make_scheduler(self._dispatch)
        self.owner: dict[int, int] = {}
        self.removed = 0
        self.threads = [_Thread("inserter")] + [_Thread(f"remover{i}") for i in range(removers)]

    def _dispatch(self, txn: Transaction) -> None:
        self.dispatch_counts[txn.seq] += 1
        if self.dispatch_counts[txn.seq] > 1:
            self.failure = f"{txn!r} dispatched twice"
        e = self.sched.entry(txn.seq)
        if any(s.head() is not e for s in e.slots):
            self.failure = f"{txn!r} dispatched while not free"
        self.sink.append(txn)

    def done(self) -> bool:
        return self.removed == len(self.txns)

    def enabled(self) -> list[int]:
        out = []
        for i, th in enumerate(self.threads):
            if th.gen is not None:
                if th.waiting is None or th.waiting.index not in self.owner:
                    out.append(i)
            elif i == 0:
                if th.ops < len(self.txns):
                    out.append(i)
            elif self.sink:
                out.append(i)
        return out

    def step(self, i: int) -> None:
        th = self.threads[i]
        if th.gen is None:
            if i == 0:
                e = self.sched.new_entry(self.txns[th.ops])
                th.gen = self.sched.insert_steps(e)
            else:
                txn = self.sink.pop(0)
                th.gen = self.sched.remove_steps(self.sched.entry(txn.seq))
            th.ops += 1
            self._advance(i)
            return
        if th.waiting is not None:
            self.owner[th.waiting.index] = i
            th.waiting = None
        self._advance(i)

    def _advance(self, i: int) -> None:
        th = self.threads[i]
        try:
            action = next(th.gen)
        except StopIteration:
            th.gen = None
            if i != 0:
                self.removed += 1
            return
        except SchedulerError as exc:
            th.gen = None
            self.failure = f"{th.label}: {exc}"
            return
        if action is None:
            return
        kind, slot = action
        if kind is ACQUIRE:
            th.waiting = slot
        else:
            del self.owner[slot.index]

    def key(self) -> tuple:
        sched = self.sched
        slots = tuple(
            (s.index, tuple(e.txn.seq for e in s.queue))
            for s in sched._slots
            if s is not None
        )
        entries = tuple(
            (seq, e.run, e.claimed) for seq, e in sorted(sched._entries.items())
        )
        threads = tuple(
            (th.ops, None if th.waiting is None else th.waiting.index, _frames(th.gen))
            for th in self.threads
        )
        return (
            slots,
            entries,
            tuple(t.seq for t in self.sink),
            tuple(sorted(self.owner.items())),
            tuple(sorted(self.dispatch_counts.items())),
            self.removed,
            threads,
        )


def explore(
    txns: Sequence[Transaction],
    removers: int = 2,
    make_scheduler: Optional[Callable[[Callable], IndexScheduler]] = None,
    max_states: int = 2_000_000,
) -> ExploreResult:
    """Visit every reachable interleaving state of the given scenario."""
    if make_scheduler is None:
        def make_scheduler(sink):
            return IndexScheduler(size=1024, sink=sink)

    result = ExploreResult()
    visited: set = set()
    stack: list[tuple[int, ...]] = [()]
    while stack:
        prefix = stack.pop()
        sim = _Sim(txns, removers, make_scheduler)
        for choice in prefix:
            sim.step(choice)
        k = sim.key()
        if k in visited:
            continue
        visited.add(k)
        result.states += 1
        if result.states > max_states:
            raise RuntimeError("state budget exhausted")
        if sim.failure:
            result.failures.append(sim.failure)
            result.witness = result.witness or prefix
            continue
        enabled = sim.enabled()
        if not enabled:
            if sim.done():
                missing = [s for s, c in sim.dispatch_counts.items() if c != 1]
                if missing:
                    result.failures.append(f"seqs {missing} not dispatched exactly once")
                    result.witness = result.witness or prefix
                result.terminals += 1
            else:
                stuck = [s for s, c in sim.dispatch_counts.items() if c == 0]
                result.failures.append(f"no thread can move; never dispatched: {stuck}")
                result.witness = result.witness or prefix
            continue
        for i in reversed(enabled):
            stack.append(prefix + (i,))
    return result


def describe(txns: Sequence[Transaction], witness: Sequence[int], removers: int = 2, make_scheduler=None) -> list[str]:
    """Replay a witness and list which thread moved at each step."""
    if make_scheduler is None:
        def make_scheduler(sink):
            return IndexScheduler(size=1024, sink=sink, trace=True)
    sim = _Sim(txns, removers, make_scheduler)
    lines = []
    for c in witness:
        sim.step(c)
        lines.append(sim.threads[c].label)
    return lines
