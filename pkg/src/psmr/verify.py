"""Seeded property suites shared by the ``verify`` command and the tests."""

from __future__ import annotations

from dataclasses import dataclass, field

from .harness import SCHEDULERS, SchedulerConfig, run_replica, run_replicas, verify_schedule
from .workload import WorkloadSpec, adversarial, generate

# cycled per seed so one sweep covers disjoint, light, heavy and chained logs
CONFLICT_RATES = (0.0, 0.05, 0.2, 0.5, 1.0)
# tiny tables force slot collisions between unrelated records
HASHMAP_SIZES = (16, 256, 1_024_000)
ADVERSARIAL = ("same", "distinct", "alternating", "chain")


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        status = "ok" if self.ok else f"{len(self.failures)} FAILED"
        return f"{self.name}: {self.checks} checks, {status}"


def seeded_log(seed: int, txns: int):
    """Log for a seed: size in [1, txns], conflict rate and window cycled."""
    n = 1 + (seed * 7919) % txns
    spec = WorkloadSpec(
        txn_count=n,
        conflict_rate=CONFLICT_RATES[seed % len(CONFLICT_RATES)],
        conflict_window=1 + seed % 50,
        seed=seed,
    )
    return generate(spec)


def oracle_suite(seeds: range, txns: int = 200, workers: int = 8) -> SuiteResult:
    """Index-scheduler traces against the brute-force pairwise conflict graph."""
    res = SuiteResult("oracle")
    for seed in seeds:
        log_ = seeded_log(seed, txns)
        cfg = SchedulerConfig("fast", hashmap_size=HASHMAP_SIZES[seed % len(HASHMAP_SIZES)])
        rep = run_replica(log_, cfg, workers, jitter_seed=seed)
        res.checks += 1
        if not rep.ok:
            res.failures.append(f"seed {seed}: {rep.errors or 'ledger violation'}")
            continue
        ok, msg = verify_schedule(log_, rep.trace, cfg.slot_of())
        if not ok:
            res.failures.append(f"seed {seed}: {msg}")
    return res


def consistency_suite(seeds: range, txns: int = 200, workers: int = 4, replicas: int = 3) -> SuiteResult:
    """Replica identity and exactly-once for every scheduler, plus cross-scheduler equality."""
    res = SuiteResult("consistency")
    for seed in seeds:
        log_ = seeded_log(seed, txns)
        digests = {}
        for kind in SCHEDULERS:
            cfg = SchedulerConfig(kind, batch_size=1 + seed % 8)
            rep = run_replicas(log_, cfg, workers, replicas, seed=seed)
            res.checks += 1
            if not rep.consistent:
                res.failures.append(f"seed {seed} {kind}: {rep.failures()}")
            digests[kind] = rep.digests[0]
        res.checks += 1
        if len(set(digests.values())) != 1:
            res.failures.append(f"seed {seed}: schedulers disagree {digests}")
    return res


def interleave_suite(removers: int = 2) -> SuiteResult:
    """Exhaustive interleavings of one inserter against racing removers."""
    from .interleave import SCENARIOS, explore

    res = SuiteResult("interleave")
    for name, txns in SCENARIOS.items():
        r = explore(txns, removers)
        res.checks += r.states
        res.failures.extend(f"{name}: {f}" for f in r.failures)
    return res


def liveness_suite(n: int = 500, worker_counts=(1, 16)) -> SuiteResult:
    res = SuiteResult("liveness")
    for kind in ADVERSARIAL:
        log_ = adversarial(kind, n)
        for sched in SCHEDULERS:
            for w in worker_counts:
                rep = run_replica(log_, SchedulerConfig(sched, batch_size=7), w, jitter_seed=w)
                res.checks += 1
                if not rep.ok:
                    res.failures.append(f"{kind}/{sched}/N={w}: {rep.errors} stuck={rep.stuck[:10]}")
    return res
