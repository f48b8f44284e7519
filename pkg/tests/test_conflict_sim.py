import pytest

from psmr.conflict_sim import (
    CSV_HEADER,
    SimResult,
    analytic_pairwise_rate,
    simulate_batch_rate,
    simulate_index_rate,
    to_csv,
)


def test_analytic_pairwise():
    assert analytic_pairwise_rate(102_400) == pytest.approx(9.765625e-6)
    assert analytic_pairwise_rate(1_024_000) == pytest.approx(9.765625e-7)
    assert analytic_pairwise_rate(1) == 1.0
    with pytest.raises(ValueError):
        analytic_pairwise_rate(0)


def test_injective_hash_over_large_table_never_collides():
    assert simulate_index_rate(10**8, q=100, trials=20_000, injective=True) == 0.0


@pytest.mark.parametrize("size", [1024, 102_400])
def test_index_rate_near_one_over_h(size):
    rate = simulate_index_rate(size, q=10_000, trials=200_000, seed=1)
    assert rate == pytest.approx(1 / size, rel=0.2)


def test_batch_m1_matches_index():
    size = 4096
    idx = simulate_index_rate(size, q=2000, trials=100_000, seed=3)
    bat = simulate_batch_rate(size, 1, q=2000, trials=100_000, seed=4)
    assert bat == pytest.approx(idx, rel=0.1)


def test_batch_amplification():
    for size in (102_400, 1_024_000):
        r200 = simulate_batch_rate(size, 200, trials=20_000, seed=0)
        r400 = simulate_batch_rate(size, 400, trials=20_000, seed=0)
        assert r400 > r200


def test_seed_determinism():
    assert simulate_batch_rate(2048, 8, q=64, trials=5000, seed=7) == simulate_batch_rate(
        2048, 8, q=64, trials=5000, seed=7
    )


def test_bad_args():
    with pytest.raises(ValueError):
        simulate_index_rate(10, q=0)
    with pytest.raises(ValueError):
        simulate_batch_rate(10, 20, q=10)


def test_csv():
    text = to_csv([SimResult("index", 102400, 1, 10000, 10, 9.8e-6)])
    lines = text.split("\n")
    assert lines[0] == ",".join(CSV_HEADER) == "model,H_or_B,m,q,trials,rate"
    assert lines[1] == "index,102400,1,10000,10,9.8e-06"


def test_fallback_backend_gives_identical_rates():
    import os
    import subprocess
    import sys

    code = (
        "from psmr import _backend; from psmr.conflict_sim import *; "
        "print(_backend.BACKEND, simulate_index_rate(512, q=300, trials=3000, seed=2), "
        "simulate_batch_rate(4096, 20, q=400, trials=300, seed=2))"
    )
    outs = {}
    for backend in ("python", ""):
        env = dict(os.environ, PSMR_BACKEND=backend)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        name, *vals = res.stdout.split()
        outs[name] = vals
    assert "python" in outs
    assert len({tuple(v) for v in outs.values()}) == 1
