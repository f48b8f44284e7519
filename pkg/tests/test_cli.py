import csv
import io
import subprocess
import sys

import pytest

from psmr import cli
from psmr.harness import ConsistencyReport, ReplicaReport


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bench_smoke(capsys):
    code, out, _ = run(capsys, "bench", "--scheduler", "fast", "--workers", "8", "--conflict-rate", "0", "--txns", "2000")
    assert code == 0
    assert out.splitlines()[0] == ",".join(cli.BENCH_HEADER)
    assert out.splitlines()[0] == (
        "scheduler,workers,batch_size,hashmap_size,conflict_rate,txns,throughput_tps,comparisons,wall_ms,consistent"
    )
    (row,) = rows(out)
    assert row["scheduler"] == "fast" and row["consistent"] == "true"
    assert float(row["throughput_tps"]) > 0
    assert "\r" not in out


def test_bench_sweep_to_file(tmp_path, capsys):
    out_path = tmp_path / "b.csv"
    trace_path = tmp_path / "t.csv"
    code, _, _ = run(
        capsys, "bench", "--scheduler", "cbase,batch,fast", "--workers", "1,4", "--conflict-rate", "0,0.1",
        "--txns", "300", "--batch-size", "10", "--replicas", "2", "--out", str(out_path),
        "--trace-out", str(trace_path),
    )
    assert code == 0
    got = rows(out_path.read_text(encoding="utf-8"))
    assert len(got) == 12
    assert {r["scheduler"] for r in got} == {"cbase", "batch", "fast"}
    assert all(r["consistent"] == "true" for r in got)
    assert {r["batch_size"] for r in got if r["scheduler"] == "batch"} == {"10"}
    trace = trace_path.read_text().splitlines()
    assert trace[0] == "replica,seq,worker,start_tick,end_tick"
    assert len(trace) == 1 + 12 * 2 * 300


def test_bench_config_file_and_env(tmp_path, capsys, monkeypatch):
    conf = tmp_path / "w.conf"
    conf.write_text("txn_count=123\nconflict_rate=0.5\nseed=4\n")
    monkeypatch.setenv("PSMR_WORKERS", "3")
    code, out, _ = run(capsys, "bench", "--config", str(conf))
    (row,) = rows(out)
    assert code == 0
    assert row["txns"] == "123" and row["conflict_rate"] == "0.5" and row["workers"] == "3"


def test_bench_consistency_failure_exits_nonzero(capsys, monkeypatch):
    bad = ReplicaReport(0, "fast", 1, 1, "d0", 1, 1, 0, 0, [], 0.1, 0, 1)
    good = ReplicaReport(1, "fast", 1, 1, "d1", 1, 0, 0, 0, [], 0.1, 0, 1)
    monkeypatch.setattr(cli, "run_replicas", lambda *a, **k: ConsistencyReport([bad, good]))
    code, out, err = run(capsys, "bench", "--txns", "5", "--seed", "17")
    assert code == 1
    assert rows(out)[0]["consistent"] == "false"
    assert "seed=17" in err and "exactly-once" in err


def test_simulate_index_and_batch(capsys):
    code, out, _ = run(capsys, "simulate", "--hashmap-size", "102400", "--queue-len", "10000", "--trials", "200000")
    assert code == 0
    (row,) = rows(out)
    assert row["model"] == "index"
    assert float(row["rate"]) == pytest.approx(9.84e-6, rel=0.2)
    code, out, _ = run(
        capsys, "simulate", "--model", "batch", "--bitmap-size", "102400", "--batch-size", "200,400", "--trials", "2000"
    )
    got = rows(out)
    assert [r["m"] for r in got] == ["200", "400"]
    assert float(got[1]["rate"]) > float(got[0]["rate"])


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--seeds", "10", "--txns", "60", "--suite", "oracle")
    assert code == 0 and "PASS" in out


def test_verify_failure_exits_nonzero(capsys, monkeypatch):
    from psmr import verify

    def failing(*a, **k):
        return verify.SuiteResult("oracle", 1, ["seed 0: broken"])

    monkeypatch.setattr(verify, "oracle_suite", failing)
    code, out, _ = run(capsys, "verify", "--suite", "oracle", "--seeds", "1")
    assert code == 1 and "broken" in out and "FAIL" in out


def test_bad_scheduler_rejected(capsys):
    with pytest.raises(SystemExit):
        cli.main(["bench", "--scheduler", "nope"])


def test_console_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "psmr.cli", "simulate", "--trials", "1000", "--queue-len", "100"],
        capture_output=True, text=True, check=True,
    )
    assert res.stdout.startswith("model,H_or_B,m,q,trials,rate\n")
