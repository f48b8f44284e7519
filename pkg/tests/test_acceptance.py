"""Acceptance criteria. Each test prints one ``[PASS]``/``[FAIL]`` line."""

import math
import statistics

import pytest

from psmr.batch import BatchScheduler, pack
from psmr.conflict_sim import false_positive_grid
from psmr.depgraph import CBaseScheduler
from psmr.harness import SchedulerConfig, run_replica
from psmr.verify import consistency_suite, interleave_suite, liveness_suite, oracle_suite
from psmr.workload import WorkloadSpec, generate
from test_depgraph import SIX_TXNS

pytestmark = pytest.mark.slow


def report(capsys, name, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, detail


def rel_err(got, want):
    return abs(got - want) / want


# -- 1 ------------------------------------------------------------------------

REFERENCE_RATES = {
    # (model, size, m): (reference rate, relative tolerance)
    ("index", 102_400, 1): (0.000984e-2, 0.20),
    ("index", 1_024_000, 1): (0.0000975e-2, 0.30),
    ("batch", 102_400, 200): (32.558e-2, 0.05),
    ("batch", 102_400, 400): (79.332e-2, 0.05),
    ("batch", 1_024_000, 200): (3.844e-2, 0.05),
    ("batch", 1_024_000, 400): (14.796e-2, 0.05),
}


def test_c1_false_positive_grid(capsys):
    rows = false_positive_grid(q=10_000, trials=10**6, seed=0)
    parts = []
    ok = True
    for r in rows:
        want, tol = REFERENCE_RATES[(r.model, r.size, r.m)]
        e = rel_err(r.rate, want)
        ok &= e <= tol
        parts.append(f"{r.model}/{r.size}/m={r.m} {r.rate * 100:.7g}% (err {e:.1%} <= {tol:.0%})")
    batch = {(r.size, r.m): r.rate for r in rows if r.model == "batch"}
    index = {r.size: r.rate for r in rows if r.model == "index"}
    ratio = min(batch[(s, 200)] / index[s] for s in index)
    ok &= ratio > 1e3
    report(capsys, "C1 false-positive conflict rates", ok, "; ".join(parts) + f"; min batch/index ratio {ratio:.3g}")


# -- 2 ------------------------------------------------------------------------


def test_c2_oracle_equivalence(capsys):
    res = oracle_suite(range(1000), txns=200, workers=8)
    report(capsys, "C2 oracle equivalence", res.ok and res.checks == 1000, f"{res.summary()} {res.failures[:3]}")


# -- 3 ------------------------------------------------------------------------


def test_c3_exactly_once_and_replica_identity(capsys):
    res = consistency_suite(range(100), txns=200, workers=4, replicas=3)
    report(capsys, "C3 exactly-once and replica identity", res.ok and res.checks == 400, f"{res.summary()} {res.failures[:3]}")


# -- 4 ------------------------------------------------------------------------


def test_c4_liveness(capsys):
    live = liveness_suite(n=500, worker_counts=(1, 16))
    inter = interleave_suite(removers=2)
    ok = live.ok and inter.ok and live.checks == 24
    report(capsys, "C4 liveness", ok, f"{live.summary()}; {inter.summary()} {live.failures[:3]} {inter.failures[:3]}")


# -- 5 ------------------------------------------------------------------------


def test_c5_directional_performance(capsys):
    log = generate(WorkloadSpec(txn_count=10**5, seed=0))
    tps = {}
    for w in (1, 2, 4, 8):
        rep = run_replica(log, SchedulerConfig("fast"), w, jitter_seed=w, keep_trace=False)
        assert rep.ok, rep.errors
        tps[w] = rep.throughput
    cb = run_replica(log, SchedulerConfig("cbase"), 8, jitter_seed=8, keep_trace=False)
    assert cb.ok, cb.errors
    speedup = tps[8] / cb.throughput
    scaling = all(tps[b] >= tps[a] for a, b in zip((1, 2, 4), (2, 4, 8)))

    # comparison counts while the whole log is pending (graph construction only)
    def cbase_comparisons(n):
        g = CBaseScheduler()
        for t in generate(WorkloadSpec(txn_count=n, seed=1)):
            g.insert(t)
        return g.comparisons

    def batch_comparisons(n, m=200):
        g = BatchScheduler()
        for b in pack(generate(WorkloadSpec(txn_count=n, seed=1)), m):
            g.insert(b)
        return g.comparisons

    c1, c2 = cbase_comparisons(2000), cbase_comparisons(4000)
    b1, b2 = batch_comparisons(10**5), batch_comparisons(2 * 10**5)
    cbase_exp = math.log(c2 / c1, 2)
    batch_exp = math.log(b2 / b1, 2)
    # at equal n, batching divides the count by about m^2
    per_batch = b1 / ((10**5 / 200) ** 2 / 2)
    ok = (
        speedup >= 2
        and scaling
        and abs(cbase_exp - 2) <= 0.3
        and abs(batch_exp - 2) <= 0.3
        and abs(per_batch - 1) <= 0.15
    )
    detail = (
        f"fast {', '.join(f'N={w}:{v:.0f}' for w, v in tps.items())} tps; cbase N=8 {cb.throughput:.0f} tps "
        f"(x{speedup:.2f}); comparison exponents cbase {cbase_exp:.3f}, batch {batch_exp:.3f} "
        f"(batch count / ((n/m)^2/2) = {per_batch:.3f})"
    )
    report(capsys, "C5 directional performance", ok, detail)


# -- 6 ------------------------------------------------------------------------


def median_tps(log, cfg, workers, runs):
    vals = []
    for r in range(runs):
        rep = run_replica(log, cfg, workers, jitter_seed=100 + r, keep_trace=False)
        assert rep.ok, rep.errors
        vals.append(rep.throughput)
    return statistics.median(vals)


def test_c6_conflict_robustness(capsys):
    n = 20_000
    logs = {c: generate(WorkloadSpec(txn_count=n, conflict_rate=c, seed=2)) for c in (0.0, 0.01, 0.1, 0.2, 0.5)}
    drop = {}
    for kind in ("batch", "fast"):
        cfg = SchedulerConfig(kind, batch_size=200)
        base = median_tps(logs[0.0], cfg, 8, 3)
        hit = median_tps(logs[0.01], cfg, 8, 3)
        drop[kind] = 1 - hit / base
    fast16 = [median_tps(logs[c], SchedulerConfig("fast"), 16, 5) for c in (0.0, 0.1, 0.2, 0.5)]
    monotone = all(b <= a * 1.10 for a, b in zip(fast16, fast16[1:]))
    ok = drop["batch"] > drop["fast"] and monotone
    detail = (
        f"0->1% drop batch {drop['batch']:.1%} vs fast {drop['fast']:.1%}; "
        f"fast N=16 median tps over c=0,0.1,0.2,0.5: {[round(v) for v in fast16]} (10% band)"
    )
    report(capsys, "C6 conflict robustness", ok, detail)


# -- 7 ------------------------------------------------------------------------


def test_c7_six_txn_batches_run_sequentially(capsys):
    from psmr.model import TotalOrderLog

    log = TotalOrderLog(SIX_TXNS)
    spans = []
    ok = True
    for seed in range(20):
        rep = run_replica(log, SchedulerConfig("batch", batch_size=2), workers=4, jitter_seed=seed)
        ticks = {seq: (start, end) for seq, _w, start, end in rep.trace}
        batches = [[0, 1], [2, 3], [4, 5]]
        span = [(min(ticks[s][0] for s in b), max(ticks[s][1] for s in b)) for b in batches]
        ok &= rep.ok and all(span[i][1] < span[i + 1][0] for i in range(2))
        spans.append(span)
    report(capsys, "C7 six-transaction batch degeneration", ok, f"B1->B2->B3 in all 20 jittered runs, e.g. tick spans {spans[0]}")
