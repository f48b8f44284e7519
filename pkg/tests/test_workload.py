import pytest

from psmr.model import Op
from psmr.workload import WorkloadSpec, adversarial, generate, measured_conflict_fraction


def test_conflict_free_logs_are_pairwise_disjoint():
    log = generate(WorkloadSpec(txn_count=1000, seed=4))
    seen = set()
    for t in log:
        assert seen.isdisjoint(t.records)
        seen.update(t.records)


def test_chain_conflicts_with_predecessor():
    log = generate(WorkloadSpec(txn_count=300, conflict_rate=1.0, conflict_window=1, seed=2))
    for a, b in zip(list(log), list(log)[1:]):
        assert set(a.records) & set(b.records)


def test_measured_conflict_fraction_near_target():
    spec = WorkloadSpec(txn_count=10_000, conflict_rate=0.2, conflict_window=1000, seed=9)
    frac = measured_conflict_fraction(generate(spec), spec.conflict_window)
    assert frac == pytest.approx(0.2, rel=0.10)


def test_deterministic_under_seed():
    spec = WorkloadSpec(txn_count=200, conflict_rate=0.4, seed=5)
    assert generate(spec).dumps() == generate(spec).dumps()
    other = WorkloadSpec(txn_count=200, conflict_rate=0.4, seed=6)
    assert generate(spec).dumps() != generate(other).dumps()


def test_op_mix_respected():
    log = generate(WorkloadSpec(txn_count=2000, op_mix=(("GET", 1.0),), seed=1))
    assert all(c.op is Op.GET for t in log for c in t.commands)


def test_universe_too_small_is_hard_failure():
    with pytest.raises(ValueError):
        WorkloadSpec(txn_count=100, record_universe=150, commands_per_txn=2)


def test_invalid_rates_rejected():
    with pytest.raises(ValueError):
        WorkloadSpec(conflict_rate=1.5)
    with pytest.raises(ValueError):
        WorkloadSpec(conflict_window=0)


def test_config_file(tmp_path):
    p = tmp_path / "w.conf"
    p.write_text("# workload\ntxn_count = 50\nconflict-rate=0.25\nop_mix=PUT:1,GET:1\nseed=3\n")
    spec = WorkloadSpec.from_file(p)
    assert spec.txn_count == 50 and spec.conflict_rate == 0.25 and spec.seed == 3
    assert spec.op_mix == (("PUT", 1.0), ("GET", 1.0))
    with pytest.raises(ValueError):
        WorkloadSpec.from_mapping({"nope": "1"})


@pytest.mark.parametrize("kind", ["same", "distinct", "alternating", "chain"])
def test_adversarial_shapes(kind):
    log = adversarial(kind, 30)
    assert len(log) == 30
    if kind == "same":
        assert {t.records for t in log} == {(b"x",)}
    if kind == "distinct":
        assert len({r for t in log for r in t.records}) == 30


def test_unknown_adversarial():
    with pytest.raises(ValueError):
        adversarial("zigzag", 3)
