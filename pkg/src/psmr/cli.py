"""``psmr`` command line: throughput benchmarks, the conflict-rate simulation, verification.

Every flag default can be overridden from the environment as ``PSMR_<FLAG>``
(upper case, dashes as underscores), e.g. ``PSMR_WORKERS=1,2,4``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import itertools
import os
import statistics
import sys
from typing import Callable, Optional, Sequence

from . import _backend
from .batch import DEFAULT_BATCH_SIZE, DEFAULT_BITMAP_SIZE
from .conflict_sim import QUEUE_LEN, SimResult, simulate_batch_rate, simulate_index_rate, to_csv
from .harness import SCHEDULERS, SchedulerConfig, run_replicas, trace_csv
from .index import DEFAULT_SIZE
from .workload import WorkloadSpec, generate

ENV_PREFIX = "PSMR_"

BENCH_HEADER = [
    "scheduler",
    "workers",
    "batch_size",
    "hashmap_size",
    "conflict_rate",
    "txns",
    "throughput_tps",
    "comparisons",
    "wall_ms",
    "consistent",
]


def _list(conv: Callable) -> Callable[[str], list]:
    def parse(text: str) -> list:
        return [conv(x) for x in str(text).split(",") if x.strip()]

    parse.__name__ = f"list[{conv.__name__}]"
    return parse


def _scheduler(name: str) -> str:
    name = name.strip()
    if name not in SCHEDULERS:
        raise argparse.ArgumentTypeError(f"unknown scheduler {name!r}")
    return name


def _add(p: argparse.ArgumentParser, flag: str, **kw) -> None:
    env = ENV_PREFIX + flag.lstrip("-").replace("-", "_").upper()
    if env in os.environ:
        kw["default"] = os.environ[env]
    p.add_argument(flag, **kw)


def _open_out(path: Optional[str]):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


# -- bench -------------------------------------------------------------------


def cmd_bench(args) -> int:
    base = WorkloadSpec.from_file(args.config) if args.config else WorkloadSpec(txn_count=100_000)
    overrides = {
        "txn_count": args.txns,
        "conflict_window": args.conflict_window,
        "commands_per_txn": args.commands_per_txn,
    }
    base = dataclasses.replace(base, **{k: v for k, v in overrides.items() if v is not None})
    seed = base.seed if args.seed is None else args.seed
    rates = args.conflict_rate if args.conflict_rate is not None else [base.conflict_rate]
    out, close = _open_out(args.out)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(BENCH_HEADER)
    traces = []
    failed = False
    try:
        for rate in rates:
            log_ = generate(dataclasses.replace(base, conflict_rate=rate, seed=seed))
            for kind, workers, bsize, hsize in itertools.product(
                args.scheduler, args.workers, args.batch_size, args.hashmap_size
            ):
                cfg = SchedulerConfig(
                    kind,
                    hashmap_size=hsize,
                    batch_size=bsize,
                    bitmap_size=args.bitmap_size,
                    max_pending=args.max_pending or None,
                )
                rep = run_replicas(
                    log_,
                    cfg,
                    workers,
                    args.replicas,
                    seed=seed,
                    jitter_us=args.jitter_us,
                    timeout=args.timeout_ms / 1000 if args.timeout_ms else None,
                    keep_trace=bool(args.trace_out),
                )
                tps = statistics.fmean(r.throughput for r in rep.replicas)
                wall = statistics.fmean(r.wall_s for r in rep.replicas) * 1000
                w.writerow([
                    kind,
                    workers,
                    bsize if kind == "batch" else "",
                    hsize if kind == "fast" else "",
                    rate,
                    base.txn_count,
                    f"{tps:.1f}",
                    rep.replicas[0].comparisons,
                    f"{wall:.1f}",
                    str(rep.consistent).lower(),
                ])
                out.flush()
                if args.trace_out:
                    traces.extend(rep.replicas)
                if not rep.consistent:
                    failed = True
                    print(
                        f"consistency failure: scheduler={kind} workers={workers} "
                        f"conflict_rate={rate} seed={seed}",
                        file=sys.stderr,
                    )
                    for line in rep.failures():
                        print(f"  {line}", file=sys.stderr)
    finally:
        if close:
            out.close()
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8", newline="") as fh:
            fh.write(trace_csv(traces))
    return 1 if failed else 0


# -- simulate ------------------------------------------------------------------


def cmd_simulate(args) -> int:
    rows = []
    if args.model in ("index", "all"):
        for h in args.hashmap_size:
            rate = simulate_index_rate(h, args.queue_len, args.trials, seed=args.seed)
            rows.append(SimResult("index", h, 1, args.queue_len, args.trials, rate))
    if args.model in ("batch", "all"):
        sizes = args.bitmap_size or args.hashmap_size
        for b, m in itertools.product(sizes, args.batch_size):
            rate = simulate_batch_rate(b, m, args.queue_len, args.trials, seed=args.seed)
            rows.append(SimResult("batch", b, m, args.queue_len, args.trials, rate))
    out, close = _open_out(args.out)
    try:
        out.write(to_csv(rows))
    finally:
        if close:
            out.close()
    return 0


# -- verify --------------------------------------------------------------------


def cmd_verify(args) -> int:
    from .verify import consistency_suite, interleave_suite, liveness_suite, oracle_suite

    seeds = range(args.seed, args.seed + args.seeds)
    suites = {
        "oracle": lambda: oracle_suite(seeds, args.txns, args.workers),
        "consistency": lambda: consistency_suite(seeds, args.txns),
        "liveness": lambda: liveness_suite(),
        "interleave": interleave_suite,
    }
    chosen = list(suites) if args.suite == "all" else [args.suite]
    ok = True
    for name in chosen:
        res = suites[name]()
        print(res.summary())
        for f in res.failures[:20]:
            print(f"  {f}")
        ok &= res.ok
    print(f"backend={_backend.BACKEND} seeds={args.seed}..{args.seed + args.seeds - 1} -> {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="psmr", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="throughput of simulated replicas; one CSV row per configuration")
    _add(b, "--scheduler", type=_list(_scheduler), default=["fast"], help="comma list of cbase,batch,fast")
    _add(b, "--workers", type=_list(int), default=[8], help="comma list of worker counts")
    _add(b, "--txns", type=int, default=None, help="default 100000")
    _add(b, "--conflict-rate", type=_list(float), default=None, help="comma list; default 0")
    _add(b, "--conflict-window", type=int, default=None, help="default 1000")
    _add(b, "--commands-per-txn", type=int, default=None, help="default 2")
    _add(b, "--batch-size", type=_list(int), default=[DEFAULT_BATCH_SIZE], help="comma list")
    _add(b, "--bitmap-size", type=int, default=DEFAULT_BITMAP_SIZE)
    _add(b, "--hashmap-size", type=_list(int), default=[DEFAULT_SIZE], help="comma list")
    _add(b, "--replicas", type=int, default=1)
    _add(b, "--max-pending", type=int, default=2000, help="accepted-but-unfinished bound; 0 disables")
    _add(b, "--jitter-us", type=float, default=200.0, help="upper bound of the per-transaction delay")
    _add(b, "--seed", type=int, default=None, help="default 0")
    _add(b, "--timeout-ms", type=int, default=0, help="per-replica liveness timeout; 0 scales with --txns")
    _add(b, "--config", default=None, help="key=value workload file; flags override it")
    _add(b, "--trace-out", default=None, help="write the execution trace CSV here")
    _add(b, "--out", default="-")
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("simulate", help="false-positive conflict rates of the index and of batch bitmaps")
    _add(s, "--model", choices=("index", "batch", "all"), default="index")
    _add(s, "--hashmap-size", type=_list(int), default=[102_400])
    _add(s, "--bitmap-size", type=_list(int), default=None, help="batch bitmap sizes; defaults to --hashmap-size")
    _add(s, "--batch-size", type=_list(int), default=[DEFAULT_BATCH_SIZE])
    _add(s, "--queue-len", type=int, default=QUEUE_LEN)
    _add(s, "--trials", type=int, default=10**6)
    _add(s, "--seed", type=int, default=0)
    _add(s, "--out", default="-")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run the property suites across seeds")
    _add(v, "--seeds", type=int, default=100)
    _add(v, "--seed", type=int, default=0, help="first seed")
    _add(v, "--txns", type=int, default=200, help="maximum log length per seed")
    _add(v, "--workers", type=int, default=8)
    _add(v, "--suite", choices=("oracle", "consistency", "liveness", "interleave", "all"), default="all")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
