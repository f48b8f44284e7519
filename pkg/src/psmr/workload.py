"""Deterministic transaction streams with a tunable conflict rate.

With probability ``conflict_rate`` a transaction reuses one record drawn
uniformly from the records of the previous ``conflict_window`` transactions;
every other record it touches is fresh (never used before in the log).
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Mapping

import numpy as np

from .model import Command, Op, TotalOrderLog

DEFAULT_OP_MIX = (("PUT", 0.5), ("GET", 0.3), ("DELETE", 0.2))


@dataclass(frozen=True)
class WorkloadSpec:
    txn_count: int = 1000
    record_universe: int = 10**8
    commands_per_txn: int = 2
    conflict_rate: float = 0.0
    conflict_window: int = 1000
    op_mix: tuple = DEFAULT_OP_MIX
    seed: int = 0

    def __post_init__(self):
        if self.txn_count < 0:
            raise ValueError("txn_count must be >= 0")
        if self.commands_per_txn < 1:
            raise ValueError("commands_per_txn must be >= 1")
        if not 0.0 <= self.conflict_rate <= 1.0:
            raise ValueError("conflict_rate must be in [0, 1]")
        if self.conflict_window < 1:
            raise ValueError("conflict_window must be >= 1")
        if self.txn_count * self.commands_per_txn > self.record_universe:
            raise ValueError(
                f"record universe {self.record_universe} cannot supply "
                f"{self.txn_count * self.commands_per_txn} fresh keys"
            )

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "WorkloadSpec":
        """Build from string values, e.g. a parsed ``key=value`` file."""
        kwargs = {}
        types = {f.name: f.type for f in fields(cls)}
        for k, v in values.items():
            k = k.strip().replace("-", "_")
            if k not in types:
                raise ValueError(f"unknown workload key {k!r}")
            if k == "op_mix":
                pairs = [p.split(":") for p in v.split(",")]
                kwargs[k] = tuple((op.strip().upper(), float(w)) for op, w in pairs)
            elif k == "conflict_rate":
                kwargs[k] = float(v)
            else:
                kwargs[k] = int(float(v))
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "WorkloadSpec":
        values = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    k, _, v = line.partition("=")
                    values[k] = v.strip()
        return cls.from_mapping(values)


def record_key(k: int) -> bytes:
    return b"k%08d" % k


def generate(spec: WorkloadSpec) -> TotalOrderLog:
    rng = np.random.default_rng(spec.seed)
    n, k = spec.txn_count, spec.commands_per_txn
    fresh = rng.choice(spec.record_universe, size=n * k, replace=False) if n else []
    fresh_iter = iter(int(x) for x in fresh)

    ops = [Op(name) for name, _ in spec.op_mix]
    weights = np.array([w for _, w in spec.op_mix], dtype=float)
    op_draws = rng.choice(len(ops), size=(n, k), p=weights / weights.sum())
    reuse = rng.random(n) < spec.conflict_rate
    picks = rng.random((n, 2))

    log = TotalOrderLog()
    recent: list[tuple[bytes, ...]] = []
    for i in range(n):
        records = []
        if reuse[i] and i > 0:
            lo = max(0, i - spec.conflict_window)
            src = recent[lo + int(picks[i, 0] * (i - lo))]
            records.append(src[int(picks[i, 1] * len(src))])
        while len(records) < k:
            records.append(record_key(next(fresh_iter)))
        commands = []
        for j, r in enumerate(records):
            op = ops[op_draws[i, j]]
            value = b"v%d.%d" % (i, j) if op is Op.PUT else None
            commands.append(Command(op, r, value))
        t = log.append(commands)
        recent.append(t.records)
    return log


def measured_conflict_fraction(log: TotalOrderLog, window: int) -> float:
    """Fraction of transactions sharing a record with one of the previous ``window``."""
    n = len(log)
    if n < 2:
        return 0.0
    last_seen: dict[bytes, int] = {}
    hits = 0
    for t in log:
        if any(t.seq - last_seen.get(r, -(10**18)) <= window for r in t.records):
            hits += 1
        for r in t.records:
            last_seen[r] = t.seq
    return hits / (n - 1)


def adversarial(kind: str, n: int) -> TotalOrderLog:
    """Hand-shaped logs used for liveness checks.

    ``same``: every transaction touches one record. ``distinct``: nothing
    shared. ``alternating``: two records, transaction i touches i % 2 and,
    every third one, both. ``chain``: conflict rate 1 with a window of 1, so
    each transaction shares a record with its predecessor.
    """
    if kind == "chain":
        return generate(WorkloadSpec(txn_count=n, conflict_rate=1.0, conflict_window=1))
    log = TotalOrderLog()
    for i in range(n):
        if kind == "same":
            recs = [b"x"]
        elif kind == "distinct":
            recs = [record_key(i)]
        elif kind == "alternating":
            recs = [b"a", b"b"] if i % 3 == 0 else [b"ab"[i % 2 : i % 2 + 1]]
        else:
            raise ValueError(f"unknown adversarial workload {kind!r}")
        log.append([Command.put(r, b"%d" % i) for r in recs])
    return log

