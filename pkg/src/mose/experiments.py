"""Desk-scale experiments: compression ratio and throughput versus replication."""

from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from mose.bench import BenchConfig, BenchReport, replay, synth_corpus, synth_query_log, write_report_csv
from mose.cluster import ClusterConfig, launch, partition_corpus
from mose.index import build_subindex_file, read_subindex, write_subindex

log = logging.getLogger(__name__)


@dataclass
class CompressionStats:
    postings: int
    postings_bytes: int
    terms: int
    index_bytes: int

    @property
    def baseline_bytes(self) -> int:
        return 4 * self.postings

    @property
    def ratio(self) -> float:
        return self.postings_bytes / self.baseline_bytes if self.postings else float("nan")


def compression_stats(idx, index_bytes: int = 0) -> CompressionStats:
    postings = sum(info.df for _, info in idx.lexicon.items())
    return CompressionStats(postings, len(idx.postings), idx.lexicon.term_count, index_bytes)


def build_partitions(corpus, p: int, out_dir, workers: int = 1) -> list[Path]:
    """Partition a corpus round-robin and write one index file per partition."""
    out_dir = Path(out_dir)
    parts = partition_corpus(corpus, p, out_dir / f"p{p}")
    paths = []
    for j, part in enumerate(parts.paths):
        path = out_dir / f"p{p}" / f"index{j}"
        write_subindex(build_subindex_file(part, j, workers), path)
        paths.append(path)
    return paths


def postings_bytes(path) -> int:
    return len(read_subindex(path).postings)


@dataclass
class ThroughputConfig:
    docs: int = 20_000
    vocab: int = 50_000
    zipf_s: float = 1.0
    doc_len: int = 100
    seed: int = 11
    log_size: int = 2_000
    queries: int = 600
    warmup: int = 60
    clients: int = 6
    k: int = 2
    l: int = 10
    ns: tuple = (1, 2, 3)
    ps: tuple = (1, 2)
    cache_fraction: float = 0.25  # searcher cache as a fraction of the smallest partition's postings
    repeats: int = 3

    def __post_init__(self):
        if self.queries <= self.warmup:
            raise ValueError("queries must exceed warmup")
        if not 0 < self.cache_fraction <= 1:
            raise ValueError("cache_fraction must be in (0, 1]")


@dataclass
class ThroughputResult:
    reports: dict[tuple, list[BenchReport]] = field(default_factory=dict)
    cache_bytes: int = 0
    postings_bytes: dict[int, list[int]] = field(default_factory=dict)

    def median(self, n: int, k: int, p: int) -> BenchReport:
        runs = sorted(self.reports[(n, k, p)], key=lambda r: r.qps)
        return runs[len(runs) // 2]

    def qps(self, n: int, k: int, p: int) -> float:
        return self.median(n, k, p).qps

    def all_answered(self) -> bool:
        return all(r.errors == 0 and r.answered == r.queries for rs in self.reports.values() for r in rs)


def throughput_sweep(cfg: ThroughputConfig, workdir, csv_path=None) -> ThroughputResult:
    """Run every (n, k, p) of the sweep `repeats` times against one synthetic corpus.

    All searchers get the same cache budget, sized so every partition is at
    least 1/cache_fraction times larger than it.
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    corpus = synth_corpus(cfg.docs, cfg.vocab, cfg.zipf_s, cfg.seed, workdir / "corpus.txt", cfg.doc_len)
    queries = synth_query_log(cfg.log_size, cfg.vocab, cfg.zipf_s, cfg.seed, workdir / "queries.txt")
    indexes = {p: build_partitions(corpus, p, workdir) for p in cfg.ps}
    result = ThroughputResult()
    result.postings_bytes = {p: [postings_bytes(path) for path in paths] for p, paths in indexes.items()}
    smallest = min(b for sizes in result.postings_bytes.values() for b in sizes)
    result.cache_bytes = max(1, int(smallest * cfg.cache_fraction))

    for rep in range(cfg.repeats):
        for p in cfg.ps:
            for n in cfg.ns:
                config = ClusterConfig.local(n, cfg.k, p, cfg.l, indexes[p], cache_bytes=result.cache_bytes)
                with launch(config) as topo:
                    bench = BenchConfig(queries, topo.qa_endpoints, cfg.clients, cfg.queries, cfg.warmup,
                                        cfg.l, (n, cfg.k, p))
                    report = replay(bench)
                log.info("rep %d (%d,%d,%d): %.1f qps, %d errors", rep, n, cfg.k, p, report.qps, report.errors)
                result.reports.setdefault((n, cfg.k, p), []).append(report)

    if csv_path is not None:
        rows = [result.median(n, cfg.k, p) for p in cfg.ps for n in cfg.ns]
        write_report_csv(rows, csv_path)
    return result


def spread(values) -> float:
    """Relative spread (max - min) / median, a crude noise estimate."""
    values = list(values)
    med = statistics.median(values)
    return (max(values) - min(values)) / med if med else float("nan")
