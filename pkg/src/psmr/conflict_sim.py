"""False-positive conflict rates of the single-hash index versus batch bitmaps.

Single-record transactions stream through a pending window of ``q``
transactions. The index model scores each new transaction by the fraction
of pending transactions sharing its hash slot; the batch model scores each
new batch of ``m`` by the fraction of the ``q // m`` pending batches whose
bitmap intersects its own.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass

import numpy as np

from . import _backend
from .hashing import DEFAULT_SEED, slots_of_keys

UNIVERSE = 10**8
QUEUE_LEN = 10_000

# batches per generated block; bounds memory at block * m keys
_BLOCK_BATCHES = 4096


@dataclass(frozen=True)
class SimResult:
    model: str
    size: int
    m: int
    q: int
    trials: int
    rate: float


def analytic_pairwise_rate(size: int) -> float:
    """Probability that two distinct records share a slot under uniform hashing."""
    if size < 1:
        raise ValueError("size must be >= 1")
    return 1.0 / size


def _slots(keys: np.ndarray, size: int, hash_seed: int, injective: bool) -> np.ndarray:
    if injective:
        return (keys % size).astype(np.int64)
    return slots_of_keys(keys, size, hash_seed)


def simulate_index_rate(
    size: int,
    q: int = QUEUE_LEN,
    trials: int = 10**6,
    universe: int = UNIVERSE,
    seed: int = 0,
    hash_seed: int = DEFAULT_SEED,
    injective: bool = False,
) -> float:
    """Mean fraction of the q pending transactions sharing the new one's slot.

    Keys are distinct when the universe allows it (``q + trials <= universe``).
    ``injective`` maps key k to slot k mod size instead of hashing.
    """
    if q < 1 or trials < 1:
        raise ValueError("q and trials must be >= 1")
    rng = np.random.default_rng(seed)
    n = q + trials
    if n <= universe:
        keys = rng.choice(universe, size=n, replace=False).astype(np.uint64)
    else:
        keys = rng.integers(0, universe, size=n, dtype=np.uint64)
    slots = _slots(keys, size, hash_seed, injective)
    hits = _backend.window_collisions(slots, q, size)
    return hits / (trials * q)


def simulate_batch_rate(
    size: int,
    m: int,
    q: int = QUEUE_LEN,
    trials: int = 10**6,
    universe: int = UNIVERSE,
    seed: int = 0,
    hash_seed: int = DEFAULT_SEED,
    injective: bool = False,
) -> float:
    """Mean fraction of the q // m pending batches whose bitmap meets a fresh batch's."""
    if m < 1 or q < m or trials < 1:
        raise ValueError("need 1 <= m <= q and trials >= 1")
    w = q // m
    rng = np.random.default_rng(seed)

    def draw(nb):
        keys = rng.integers(0, universe, size=nb * m, dtype=np.uint64)
        return _slots(keys, size, hash_seed, injective).reshape(nb, m)

    prev = draw(w)
    hits = 0
    done = 0
    while done < trials:
        nb = min(_BLOCK_BATCHES, trials - done)
        block = np.concatenate([prev, draw(nb)])
        hits += _backend.batch_window_conflicts(block, w, w, size)
        prev = block[-w:]
        done += nb
    return hits / (trials * w)


def false_positive_grid(
    sizes=(102_400, 1_024_000),
    batch_sizes=(200, 400),
    q: int = QUEUE_LEN,
    trials: int = 10**6,
    seed: int = 0,
) -> list[SimResult]:
    rows = []
    for size in sizes:
        rows.append(SimResult("index", size, 1, q, trials, simulate_index_rate(size, q, trials, seed=seed)))
        for m in batch_sizes:
            rate = simulate_batch_rate(size, m, q, trials, seed=seed)
            rows.append(SimResult("batch", size, m, q, trials, rate))
    return rows


CSV_HEADER = ["model", "H_or_B", "m", "q", "trials", "rate"]


def to_csv(rows: list[SimResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        d = asdict(r)
        w.writerow([d["model"], d["size"], d["m"], d["q"], d["trials"], repr(d["rate"])])
    return buf.getvalue()
