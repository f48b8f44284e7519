from psmr.verify import SuiteResult, consistency_suite, liveness_suite, oracle_suite, seeded_log


def test_seeded_logs_vary_and_are_bounded():
    sizes = {len(seeded_log(s, 50)) for s in range(30)}
    assert max(sizes) <= 50 and len(sizes) > 5
    assert seeded_log(3, 50).dumps() == seeded_log(3, 50).dumps()


def test_small_suites_pass():
    assert oracle_suite(range(15), txns=80).ok
    assert consistency_suite(range(3), txns=60).ok
    res = liveness_suite(n=60, worker_counts=(1, 4))
    assert res.ok and res.checks == 24


def test_summary_text():
    assert SuiteResult("x", 3).summary() == "x: 3 checks, ok"
    assert SuiteResult("x", 3, ["bad"]).summary() == "x: 3 checks, 1 FAILED"
