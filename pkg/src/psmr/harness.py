"""Simulated replicas: one feeder, N jittered workers, a scheduler, a state machine.

Each replica consumes the shared log in seq order through its own scheduler
instance. Execution order is captured with a per-replica atomic tick counter
so ordering checks are exact rather than clock based.
"""

from __future__ import annotations

import csv
import io
import itertools
import queue
import random
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .batch import DEFAULT_BATCH_SIZE, DEFAULT_BITMAP_SIZE, BatchScheduler, pack
from .depgraph import CBaseScheduler, DependencyGraph
from .hashing import DEFAULT_SEED, hash_bytes
from .index import DEFAULT_SIZE, IndexScheduler
from .model import ReplicaState, TotalOrderLog, Transaction

SCHEDULERS = ("cbase", "batch", "fast")

# seconds of liveness budget per 10**5 transactions
TIMEOUT_PER_1E5 = 30.0


@dataclass(frozen=True)
class SchedulerConfig:
    kind: str = "fast"
    hashmap_size: int = DEFAULT_SIZE
    hash_seed: int = DEFAULT_SEED
    batch_size: int = DEFAULT_BATCH_SIZE
    bitmap_size: int = DEFAULT_BITMAP_SIZE
    max_pending: Optional[int] = 2000

    def __post_init__(self):
        if self.kind not in SCHEDULERS:
            raise ValueError(f"unknown scheduler {self.kind!r}; expected one of {SCHEDULERS}")

    def slot_of(self) -> Optional[Callable[[bytes], int]]:
        """Record -> slot map the scheduler serializes on, when it has one."""
        if self.kind != "fast":
            return None
        size, seed = self.hashmap_size, self.hash_seed
        return lambda r: hash_bytes(r, seed) % size


@dataclass
class ReplicaReport:
    replica: int
    kind: str
    workers: int
    txns: int
    digest: str
    applied: int
    exactly_once_violations: int
    order_violations: int
    unfinished: int
    stuck: list[int]
    wall_s: float
    comparisons: int
    dispatches: int
    errors: list[str] = field(default_factory=list)
    trace: list[tuple[int, int, int, int]] = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return not (
            self.exactly_once_violations
            or self.order_violations
            or self.unfinished
            or self.errors
        )

    @property
    def throughput(self) -> float:
        return self.applied / self.wall_s if self.wall_s > 0 else float("inf")


@dataclass
class ConsistencyReport:
    replicas: list[ReplicaReport]

    @property
    def digests(self) -> list[str]:
        return [r.digest for r in self.replicas]

    @property
    def exactly_once_violations(self) -> int:
        return sum(r.exactly_once_violations for r in self.replicas)

    @property
    def order_violations(self) -> int:
        return sum(r.order_violations for r in self.replicas)

    @property
    def unfinished(self) -> int:
        return sum(r.unfinished for r in self.replicas)

    @property
    def wall_s(self) -> float:
        return sum(r.wall_s for r in self.replicas)

    @property
    def consistent(self) -> bool:
        return all(r.ok for r in self.replicas) and len(set(self.digests)) == 1

    def failures(self) -> list[str]:
        out = []
        for r in self.replicas:
            if r.unfinished:
                out.append(f"replica {r.replica}: {r.unfinished} unfinished, stuck {r.stuck[:10]}")
            if r.exactly_once_violations:
                out.append(f"replica {r.replica}: {r.exactly_once_violations} exactly-once violations")
            if r.order_violations:
                out.append(f"replica {r.replica}: {r.order_violations} order violations")
            out.extend(f"replica {r.replica}: {e}" for e in r.errors)
        if len(set(self.digests)) > 1:
            out.append("replica digests differ")
        return out


class _Window:
    """Bounds the number of accepted-but-unfinished transactions."""

    def __init__(self, limit: Optional[int]):
        self.limit = limit
        self.used = 0
        self.cond = threading.Condition(threading.Lock())

    def acquire(self, k: int, abort: threading.Event) -> bool:
        if self.limit is None:
            return True
        k = min(k, self.limit)
        with self.cond:
            while self.used + k > self.limit:
                if abort.is_set():
                    return False
                self.cond.wait(0.05)
            self.used += k
        return True

    def release(self, k: int) -> None:
        if self.limit is None:
            return
        with self.cond:
            self.used -= min(k, self.limit)
            self.cond.notify()


class _Run:
    """Shared per-replica bookkeeping for feeder and workers."""

    def __init__(self, n: int, jitter_us: float, work_us: float):
        self.n = n
        self.state = ReplicaState()
        self.ticks = itertools.count()
        self.finished = itertools.count(1)
        self.done = threading.Event()
        self.abort = threading.Event()
        self.errors: list[str] = []
        self.trace: list[tuple[int, int, int, int]] = []
        self.jitter_us = jitter_us
        self.work = (lambda: time.sleep(work_us * 1e-6)) if work_us > 0 else None
        if n == 0:
            self.done.set()

    def execute(self, txn: Transaction, worker: int, rng: random.Random) -> None:
        if self.jitter_us > 0:
            time.sleep(rng.random() * self.jitter_us * 1e-6)
        start = next(self.ticks)
        self.state.apply(txn, self.work)
        end = next(self.ticks)
        self.trace.append((txn.seq, worker, start, end))

    def finish(self, k: int = 1) -> None:
        for _ in range(k):
            if next(self.finished) == self.n:
                self.done.set()

    def fail(self, exc: BaseException) -> None:
        self.errors.append(f"{type(exc).__name__}: {exc}")
        self.abort.set()
        self.done.set()


def _run_fast(log_: TotalOrderLog, cfg: SchedulerConfig, workers: int, run: _Run, rngs):
    sink: queue.SimpleQueue = queue.SimpleQueue()
    sched = IndexScheduler(cfg.hashmap_size, cfg.hash_seed, sink=sink.put)
    window = _Window(cfg.max_pending)

    def worker(wid):
        rng = rngs[wid]
        try:
            while True:
                t = sink.get()
                if t is None:
                    return
                run.execute(t, wid, rng)
                sched.remove_and_get(t)
                window.release(1)
                run.finish()
        except Exception as exc:
            run.fail(exc)

    def feeder():
        try:
            for t in log_:
                if not window.acquire(1, run.abort):
                    return
                sched.insert_and_get(t)
        except Exception as exc:
            run.fail(exc)

    def stop():
        for _ in range(workers):
            sink.put(None)

    return sched, worker, feeder, stop


def _run_graph(graph: DependencyGraph, items, weight, run: _Run, window: _Window, execute_item):
    def worker(wid):
        try:
            while True:
                v = graph.get(block=True)
                if v is None:
                    if graph.closed:
                        return
                    continue
                execute_item(v, wid)
                graph.remove(v)
                window.release(weight(v))
                run.finish(weight(v))
        except Exception as exc:
            run.fail(exc)

    def feeder():
        try:
            for v in items:
                if not window.acquire(weight(v), run.abort):
                    return
                graph.insert(v)
        except Exception as exc:
            run.fail(exc)

    return graph, worker, feeder, graph.close


def run_replica(
    log_: TotalOrderLog,
    config: SchedulerConfig = SchedulerConfig(),
    workers: int = 4,
    jitter_seed: int = 0,
    jitter_us: float = 200.0,
    work_us: float = 0.0,
    timeout: Optional[float] = None,
    replica: int = 0,
    keep_trace: bool = True,
) -> ReplicaReport:
    """Run one replica to completion (or timeout) and report its ledger."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    n = len(log_)
    if timeout is None:
        timeout = max(5.0, TIMEOUT_PER_1E5 * n / 1e5)
    run = _Run(n, jitter_us, work_us)
    rngs = [random.Random(jitter_seed * 1_000_003 + w) for w in range(workers)]

    if config.kind == "fast":
        sched, worker, feeder, stop = _run_fast(log_, config, workers, run, rngs)
    elif config.kind == "cbase":
        sched = CBaseScheduler()

        def execute_txn(t, wid):
            run.execute(t, wid, rngs[wid])

        sched, worker, feeder, stop = _run_graph(
            sched, log_, lambda t: 1, run, _Window(config.max_pending), execute_txn
        )
    else:
        sched = BatchScheduler()

        def execute_batch(b, wid):
            for t in b.members:
                run.execute(t, wid, rngs[wid])

        batches = pack(log_, config.batch_size, config.bitmap_size, config.hash_seed)
        sched, worker, feeder, stop = _run_graph(
            sched, batches, lambda b: len(b.members), run, _Window(config.max_pending), execute_batch
        )

    threads = [threading.Thread(target=worker, args=(w,), daemon=True) for w in range(workers)]
    t0 = time.perf_counter()
    for th in threads:
        th.start()
    feed = threading.Thread(target=feeder, daemon=True)
    feed.start()
    finished = run.done.wait(timeout)
    wall = time.perf_counter() - t0
    if not finished:
        run.abort.set()
    stop()
    feed.join(1.0)
    for th in threads:
        th.join(1.0 if finished else 0.2)

    state = run.state
    counts = dict(state.applied_count)
    stuck = [t.seq for t in log_ if t.seq not in counts]
    if not finished:
        run.errors.append(f"liveness timeout after {timeout:.1f}s with {len(stuck)} transactions stuck")
    dup = sum(1 for c in counts.values() if c != 1)
    return ReplicaReport(
        replica=replica,
        kind=config.kind,
        workers=workers,
        txns=n,
        digest=state.digest(),
        applied=len(counts),
        exactly_once_violations=dup,
        order_violations=state.order_violations + state.reentry_violations,
        unfinished=len(stuck),
        stuck=stuck,
        wall_s=wall,
        comparisons=getattr(sched, "comparisons", 0),
        dispatches=getattr(sched, "dispatch_count", n - len(stuck)),
        errors=run.errors,
        trace=sorted(run.trace, key=lambda r: r[2]) if keep_trace else [],
    )


def run_replicas(
    log_: TotalOrderLog,
    config: SchedulerConfig = SchedulerConfig(),
    workers: int = 4,
    replicas: int = 3,
    seed: int = 0,
    **kwargs,
) -> ConsistencyReport:
    """Run isolated replicas over the same log, one after another, with distinct jitter."""
    reports = [
        run_replica(log_, config, workers, jitter_seed=seed * 1009 + r, replica=r, **kwargs)
        for r in range(replicas)
    ]
    return ConsistencyReport(reports)


def verify_schedule(
    log_: TotalOrderLog,
    trace,
    slot_of: Optional[Callable[[bytes], int]] = None,
    brute_force_limit: int = 2000,
) -> tuple[bool, Optional[str]]:
    """Check a trace against the pairwise conflict graph of ``log_``.

    Passes iff every seq ran exactly once and, for every pair that conflicts
    (shared record, or shared slot under ``slot_of``), the earlier one
    finished before the later one started. Trace rows are
    ``(seq, worker, start_tick, end_tick)``.
    """
    seen: dict[int, tuple[int, int]] = {}
    for seq, _w, start, end in trace:
        if seq in seen:
            return False, f"seq {seq} executed more than once"
        seen[seq] = (start, end)
    for t in log_:
        if t.seq not in seen:
            return False, f"seq {t.seq} never executed"
    if len(seen) != len(log_):
        return False, "trace holds seqs outside the log"

    def keys(t):
        ks = set(t.records)
        if slot_of is not None:
            ks |= {("slot", slot_of(r)) for r in t.records}
        return ks

    txns = list(log_)
    if len(txns) <= brute_force_limit:
        ks = [keys(t) for t in txns]
        for i, a in enumerate(txns):
            for j in range(i + 1, len(txns)):
                if not ks[i].isdisjoint(ks[j]):
                    b = txns[j]
                    if not seen[a.seq][1] < seen[b.seq][0]:
                        return False, f"conflicting pair ({a.seq}, {b.seq}) ran out of order"
        return True, None
    # per-key chains: consecutive checks imply the full pairwise relation
    last: dict = {}
    for t in txns:
        for k in keys(t):
            prev = last.get(k)
            if prev is not None and not seen[prev][1] < seen[t.seq][0]:
                return False, f"conflicting pair ({prev}, {t.seq}) ran out of order"
            last[k] = t.seq
    return True, None


TRACE_HEADER = ["replica", "seq", "worker", "start_tick", "end_tick"]


def trace_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for r in reports:
        for seq, worker, start, end in r.trace:
            w.writerow([r.replica, seq, worker, start, end])
    return buf.getvalue()

