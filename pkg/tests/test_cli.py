import csv
import os
import signal
import subprocess
import sys
from pathlib import Path

import pytest

from mose.cli import main
from mose.cluster import ClusterConfig, free_endpoints
from mose.index import read_subindex
from mose.net import wait_ready


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert run("synth", "--docs", 120, "--vocab", 400, "--seed", 5, "--doc-len", 30,
               "--out", root / "c.txt", "--log", root / "q.txt", "--log-queries", 30) == 0
    assert run("partition", "--input", root / "c.txt", "--parts", 2, "--out", root / "parts") == 0
    for j in range(2):
        assert run("index", "--input", root / "parts" / f"part{j}", "--partition-id", j,
                   "--out", root / f"idx{j}", "--workers", 2) == 0
    return root


def test_synth_partition_index(workspace, capsys):
    assert len((workspace / "q.txt").read_text().splitlines()) == 30
    a, b = read_subindex(workspace / "idx0"), read_subindex(workspace / "idx1")
    assert (a.partition_id, b.partition_id) == (0, 1)
    assert a.doc_count + b.doc_count == 120


def test_index_workers_identical(workspace):
    run("index", "--input", workspace / "parts" / "part0", "--out", workspace / "w1")
    assert (workspace / "w1").read_bytes() == (workspace / "idx0").read_bytes()


def test_launch_query_bench(workspace, capsys):
    cfg = ClusterConfig.local(1, 2, 2, 10, [workspace / "idx0", workspace / "idx1"])
    cfg.save(workspace / "cluster.cfg")
    env = dict(os.environ, PYTHONPATH=str(Path(__file__).resolve().parents[1] / "src"))
    proc = subprocess.Popen([sys.executable, "-m", "mose", "launch", "--config", workspace / "cluster.cfg"],
                            env=env, stdout=subprocess.PIPE, text=True)
    try:
        assert "up" in proc.stdout.readline()
        qa = cfg.qa_endpoints[0]
        wait_ready(qa, 10)
        capsys.readouterr()
        term = (workspace / "q.txt").read_text().split()[0]
        assert run("query", "--qa", qa, "--index", workspace / "idx0", "--index", workspace / "idx1", term) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines and all(line.split("\t")[2].startswith("http") for line in lines)
        assert run("query", "--qa", qa, "a AND (b") == 1
        assert run("bench", "--config", workspace / "cluster.cfg", "--log", workspace / "q.txt",
                   "--clients", 2, "--queries", 40, "--warmup", 5, "--csv", workspace / "r.csv",
                   "--latency-csv", workspace / "lat.csv") == 0
        assert run("bench", "--qa", qa, "--log", workspace / "q.txt", "--queries", 10,
                   "--csv", workspace / "r.csv", "--append") == 0
        rows = list(csv.DictReader(open(workspace / "r.csv")))
        assert len(rows) == 2
        assert (rows[0]["n"], rows[0]["k"], rows[0]["p"], rows[0]["errors"]) == ("1", "2", "2", "0")
    finally:
        proc.send_signal(signal.SIGTERM)
        assert proc.wait(30) == 0


def test_unreachable(workspace, capsys):
    (dead,) = free_endpoints(1)
    assert run("query", "--qa", dead, "x") == 1
    assert run("bench", "--qa", dead, "--log", workspace / "q.txt", "--csv", workspace / "x.csv") == 1
    assert "error" in capsys.readouterr().err


def test_bench_needs_target(workspace):
    assert run("bench", "--log", workspace / "q.txt", "--csv", workspace / "x.csv") == 2
