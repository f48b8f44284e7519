"""Transactions, the total-order log, and the replicated key-value state machine."""

from __future__ import annotations

import enum
import hashlib
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence
from urllib.parse import quote, unquote_to_bytes

RecordKey = bytes


class SchedulerError(RuntimeError):
    """A scheduler contract was broken (FIFO discipline, duplicate insert, ...)."""


class ExactlyOnceViolation(SchedulerError):
    """A transaction was applied more than once on the same replica."""


class Op(enum.Enum):
    PUT = "PUT"
    GET = "GET"
    DELETE = "DELETE"


@dataclass(frozen=True, slots=True)
class Command:
    op: Op
    record: RecordKey
    value: Optional[bytes] = None

    def __post_init__(self):
        if not isinstance(self.record, bytes):
            raise TypeError(f"record key must be bytes, got {type(self.record).__name__}")
        if (self.op is Op.PUT) != (self.value is not None):
            raise ValueError(f"{self.op.value} {'requires' if self.op is Op.PUT else 'takes no'} value")

    @classmethod
    def put(cls, record: RecordKey, value: bytes) -> "Command":
        return cls(Op.PUT, record, value)

    @classmethod
    def get(cls, record: RecordKey) -> "Command":
        return cls(Op.GET, record)

    @classmethod
    def delete(cls, record: RecordKey) -> "Command":
        return cls(Op.DELETE, record)


def canonicalize_records(commands: Sequence[Command]) -> tuple[RecordKey, ...]:
    """Sorted, duplicate-free record set of ``commands`` (byte order)."""
    if not commands:
        raise ValueError("a transaction needs at least one command")
    return tuple(sorted({c.record for c in commands}))


@dataclass(frozen=True, slots=True)
class Transaction:
    """An immutable log entry.

    ``records`` is derived from ``commands`` and sorted, so ``records[-1]`` is
    the well-defined last record. Per-replica dispatch state lives in the
    scheduler, never here, because one log is shared by every replica.
    """

    seq: int
    commands: tuple[Command, ...]
    records: tuple[RecordKey, ...] = field(init=False)
    record_set: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.seq < 0:
            raise ValueError("seq must be non-negative")
        object.__setattr__(self, "commands", tuple(self.commands))
        object.__setattr__(self, "records", canonicalize_records(self.commands))
        object.__setattr__(self, "record_set", frozenset(self.records))

    def __repr__(self):
        keys = ",".join(r.decode("latin-1") for r in self.records)
        return f"T{self.seq}{{{keys}}}"


class TotalOrderLog:
    """Append-only sequence of transactions, entry k has seq k.

    Stands in for the consensus output: every replica reads the same log.
    """

    def __init__(self, entries: Iterable[Transaction] = ()):
        self._entries: list[Transaction] = []
        for t in entries:
            if t.seq != len(self._entries):
                raise ValueError(f"log gap: expected seq {len(self._entries)}, got {t.seq}")
            self._entries.append(t)

    def append(self, commands: Sequence[Command]) -> Transaction:
        t = Transaction(len(self._entries), tuple(commands))
        self._entries.append(t)
        return t

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __getitem__(self, i):
        return self._entries[i]

    def dumps(self) -> str:
        return "".join(format_transaction(t) + "\n" for t in self._entries)

    @classmethod
    def loads(cls, text: str) -> "TotalOrderLog":
        return cls(parse_transaction(line) for line in text.splitlines() if line)


def next_seq(log: TotalOrderLog, commands: Sequence[Command]) -> Transaction:
    return log.append(commands)


_KEY_SAFE = "-_.~"


def format_transaction(t: Transaction) -> str:
    parts = []
    for c in t.commands:
        s = f"{c.op.value}:{quote(c.record, safe=_KEY_SAFE)}"
        if c.value is not None:
            s += ":" + c.value.hex()
        parts.append(s)
    return f"{t.seq}\t{','.join(parts)}"


def parse_transaction(line: str) -> Transaction:
    seq, body = line.rstrip("\n").split("\t")
    commands = []
    for part in body.split(","):
        fields = part.split(":")
        op = Op(fields[0])
        value = bytes.fromhex(fields[2]) if len(fields) > 2 else None
        commands.append(Command(op, unquote_to_bytes(fields[1]), value))
    return Transaction(int(seq), tuple(commands))


class ReplicaState:
    """In-memory key-value store plus the ledger used for consistency checks.

    ``apply`` does not serialize conflicting transactions itself; it only
    detects when a scheduler let two of them overlap (``reentry_violations``)
    or run out of seq order (``order_violations``).
    """

    def __init__(self):
        self.store: dict[RecordKey, bytes] = {}
        self.applied_count: dict[int, int] = {}
        self.applied_order: dict[RecordKey, list[int]] = {}
        self.results: dict[int, tuple[Optional[bytes], ...]] = {}
        self.order_violations = 0
        self.reentry_violations = 0
        self._in_use: set[RecordKey] = set()
        self._ledger = threading.Lock()

    def apply(
        self, txn: Transaction, work: Optional[Callable[[], None]] = None
    ) -> tuple[Optional[bytes], ...]:
        """Execute ``txn``'s commands in order; ``work`` runs while its records are held."""
        with self._ledger:
            if self.applied_count.get(txn.seq, 0):
                self.applied_count[txn.seq] += 1
                raise ExactlyOnceViolation(f"seq {txn.seq} applied twice")
            self.applied_count[txn.seq] = 1
            for r in txn.records:
                if r in self._in_use:
                    self.reentry_violations += 1
                self._in_use.add(r)
                order = self.applied_order.setdefault(r, [])
                if order and order[-1] >= txn.seq:
                    self.order_violations += 1
                order.append(txn.seq)
        if work is not None:
            work()
        out = []
        store = self.store
        for c in txn.commands:
            if c.op is Op.PUT:
                store[c.record] = c.value
                out.append(None)
            elif c.op is Op.GET:
                out.append(store.get(c.record))
            else:
                store.pop(c.record, None)
                out.append(None)
        result = tuple(out)
        with self._ledger:
            self.results[txn.seq] = result
            self._in_use.difference_update(txn.records)
        return result

    def digest(self) -> str:
        """SHA-256 over the store, the applied ledger and every GET result."""
        h = hashlib.sha256()
        for k in sorted(self.store):
            h.update(b"S%d:%s=%s;" % (len(k), k, self.store[k]))
        for seq in sorted(self.applied_count):
            h.update(b"A%d*%d;" % (seq, self.applied_count[seq]))
        for k in sorted(self.applied_order):
            h.update(b"O%s:%s;" % (k, ",".join(map(str, self.applied_order[k])).encode()))
        for seq in sorted(self.results):
            h.update(b"R%d:%s;" % (seq, repr(self.results[seq]).encode()))
        return h.hexdigest()
