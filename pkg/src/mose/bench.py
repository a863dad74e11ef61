"""Closed-loop query-log replay and synthetic workloads."""

from __future__ import annotations

import csv
import itertools
import logging
import random
import statistics
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from mose.client import QueryClient
from mose.errors import MoseError
from mose.index.corpus import DocumentRecord, format_record
from mose.searcher.query import And, AndNot, Or, Term, to_text

log = logging.getLogger(__name__)

CSV_COLUMNS = ["n", "k", "p", "clients", "queries", "mean_ms", "qps", "errors"]

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"
_SYLLABLES = [c + v for c in _CONSONANTS for v in _VOWELS]


def synth_word(i: int) -> str:
    """Distinct pronounceable word for every i >= 0 (bijective base-70 numeration)."""
    out = []
    i += 1
    while i:
        i -= 1
        i, r = divmod(i, len(_SYLLABLES))
        out.append(_SYLLABLES[r])
    return "".join(reversed(out))


class SynthVocab:
    """A vocabulary whose frequency ranks are a seeded shuffle of the words."""

    def __init__(self, vocab: int, zipf_s: float, seed: int):
        if vocab < 1:
            raise ValueError("vocab must be >= 1")
        words = [synth_word(i) for i in range(vocab)]
        random.Random(f"vocab:{seed}").shuffle(words)
        self.words = words  # words[r] has frequency rank r + 1
        weights = [1.0 / (r ** zipf_s) for r in range(1, vocab + 1)]
        self.cum_weights = list(itertools.accumulate(weights))

    def sample(self, rng: random.Random, k: int) -> list[str]:
        return rng.choices(self.words, cum_weights=self.cum_weights, k=k)


def synth_records(docs: int, vocab: int, zipf_s: float, seed: int, doc_len: int = 100):
    if docs < 1:
        raise ValueError("docs must be >= 1")
    words = SynthVocab(vocab, zipf_s, seed)
    rng = random.Random(seed)
    lo, hi = max(1, doc_len // 2), max(1, doc_len + doc_len // 2)
    for i in range(docs):
        body = " ".join(words.sample(rng, rng.randint(lo, hi)))
        yield DocumentRecord(f"http://synth.example/{seed}/{i}", body)


def synth_corpus(docs: int, vocab: int, zipf_s: float, seed: int, out, doc_len: int = 100) -> Path:
    """Write a reproducible Zipf(zipf_s) corpus; the same arguments give the same bytes."""
    out = Path(out)
    with open(out, "wb") as f:
        for rec in synth_records(docs, vocab, zipf_s, seed, doc_len):
            f.write(format_record(rec))
    return out


def random_query(rng: random.Random, words: SynthVocab, max_terms: int = 4) -> str:
    nterms = rng.randint(1, max_terms)
    nodes = [Term(t) for t in words.sample(rng, nterms)]
    while len(nodes) > 1:
        i = rng.randrange(len(nodes) - 1)
        op = rng.choice((And, And, Or, AndNot))
        nodes[i:i + 2] = [op(nodes[i], nodes[i + 1])]
    text = to_text(nodes[0])
    if rng.random() < 0.5:
        text = text.replace(" AND ", " ")
    return text


def synth_query_log(count: int, vocab: int, zipf_s: float, seed: int, out=None,
                    max_terms: int = 4) -> list[str]:
    """Random boolean queries over the vocabulary of the corpus with the same seed."""
    words = SynthVocab(vocab, zipf_s, seed)
    rng = random.Random(f"queries:{seed}")
    queries = [random_query(rng, words, max_terms) for _ in range(count)]
    if out is not None:
        Path(out).write_text("".join(q + "\n" for q in queries), encoding="utf-8")
    return queries


def load_query_log(path) -> list[str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    queries = [q for q in (line.strip() for line in lines) if q]
    if not queries:
        raise ValueError(f"query log {path} is empty")
    return queries


@dataclass
class BenchConfig:
    queries: Sequence[str]
    qa_endpoints: Sequence[str]
    clients: int = 1
    queries_total: int = 100
    warmup: int = 0
    l: int = 10
    topology: tuple = ("", "", "")  # (n, k, p), for labelling only
    timeout: float = 30.0

    def __post_init__(self):
        if self.queries_total < self.warmup:
            raise ValueError("queries_total must be >= warmup")
        if self.clients < 1:
            raise ValueError("clients must be >= 1")
        if not self.queries:
            raise ValueError("empty query log")
        if not self.qa_endpoints:
            raise ValueError("no QA endpoints")


@dataclass
class BenchReport:
    topology: tuple
    clients: int
    queries: int
    latencies_ms: list[float]
    wall_s: float
    answered: int
    errors: int
    warmup: int = 0
    results: dict[int, tuple] = field(repr=False, default_factory=dict)
    query_log: list[tuple[int, str, float, bool]] = field(repr=False, default_factory=list)

    @property
    def mean_ms(self) -> float:
        return statistics.fmean(self.latencies_ms) if self.latencies_ms else float("nan")

    @property
    def qps(self) -> float:
        measured = len(self.latencies_ms)
        return measured / self.wall_s if self.wall_s > 0 else 0.0

    def row(self) -> dict:
        n, k, p = self.topology
        return {"n": n, "k": k, "p": p, "clients": self.clients, "queries": self.queries,
                "mean_ms": f"{self.mean_ms:.3f}", "qps": f"{self.qps:.2f}", "errors": self.errors}


class _Client(threading.Thread):
    def __init__(self, cfg: BenchConfig, endpoint: str, next_index, stop_at: int, sink):
        super().__init__(daemon=True)
        self.cfg = cfg
        self.endpoint = endpoint
        self.next_index = next_index
        self.stop_at = stop_at
        self.sink = sink
        self.failure: Exception | None = None

    def run(self):
        client = None
        try:
            client = QueryClient(self.endpoint, self.cfg.timeout)
            while True:
                i = self.next_index(self.stop_at)
                if i >= self.stop_at:
                    return
                text = self.cfg.queries[i % len(self.cfg.queries)]
                t0 = time.perf_counter()
                try:
                    reply = client.ask(text, self.cfg.l)
                    error, hits = reply.error, reply.hits
                except (MoseError, OSError) as e:
                    log.info("query %d failed: %s", i, e)
                    error, hits = True, ()
                    client.close()
                    client = QueryClient(self.endpoint, self.cfg.timeout)
                self.sink(i, text, (time.perf_counter() - t0) * 1000.0, error, hits)
        except OSError as e:
            self.failure = e
        finally:
            if client is not None:
                client.close()


def replay(cfg: BenchConfig) -> BenchReport:
    """Replay the log with `clients` closed-loop clients spread over the QAs.

    The first `warmup` queries run to completion before timing starts and are
    excluded from latency and throughput, but count as answered or errors.
    Raises ConnectionError if a QA cannot be reached.
    """
    lock = threading.Lock()
    cursor = [0]
    results: dict[int, tuple] = {}
    per_query: list[tuple[int, str, float, bool]] = []

    def next_index(stop_at: int):
        with lock:
            i = cursor[0]
            if i < stop_at:
                cursor[0] += 1
            return i

    def sink(i, text, ms, error, hits):
        with lock:
            results[i] = (error, tuple(hits))
            per_query.append((i, text, ms, error))

    def phase(stop_at: int) -> float:
        threads = [_Client(cfg, cfg.qa_endpoints[c % len(cfg.qa_endpoints)], next_index, stop_at, sink)
                   for c in range(cfg.clients)]
        t0 = time.perf_counter()
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        elapsed = time.perf_counter() - t0
        failed = [t.failure for t in threads if t.failure is not None]
        if failed:
            raise ConnectionError(f"QA unreachable: {failed[0]}")
        return elapsed

    if cfg.warmup:
        phase(cfg.warmup)
    wall = phase(cfg.queries_total)
    per_query.sort()
    latencies = [ms for i, _, ms, _ in per_query if i >= cfg.warmup]
    errors = sum(1 for e, _ in results.values() if e)
    return BenchReport(tuple(cfg.topology), cfg.clients, cfg.queries_total, latencies, wall,
                       len(results) - errors, errors, cfg.warmup, results, per_query)


def write_report_csv(reports: Sequence[BenchReport], path, append: bool = False) -> None:
    path = Path(path)
    header = not (append and path.exists() and path.stat().st_size > 0)
    with open(path, "a" if append else "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
        if header:
            w.writeheader()
        for r in reports:
            w.writerow(r.row())


def write_latency_csv(report: BenchReport, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["index", "query", "latency_ms", "error", "warmup"])
        for i, text, ms, error in report.query_log:
            w.writerow([i, text, f"{ms:.3f}", int(error), int(i < report.warmup)])
