"""Sort-based index construction.

A master hands documents to workers through a shared queue (each idle worker
pulls the next one), workers emit sorted runs of (term, doc, tf) triples, and
the master k-way merges the runs into one SubIndex.  Local doc ids are fixed
by the master in ingestion order, so the output bytes do not depend on the
number of workers or on which worker got which document.
"""

from __future__ import annotations

import heapq
import logging
import multiprocessing as mp
import os
import struct
import tempfile
from collections import Counter
from itertools import groupby
from operator import itemgetter
from typing import Iterable, Iterator, Sequence, Union

from mose.errors import CorruptRunError, MalformedRecordError
from mose.index.codec import encode_postings
from mose.index.corpus import DocumentRecord, check_record, iter_lines, parse_record
from mose.index.lexicon import DEFAULT_BLOCK_SIZE, TermInfo, front_code
from mose.index.storage import DocInfo, MemoryPostings, SubIndex
from mose.index.text import tokenize

log = logging.getLogger(__name__)

RUN_SIZE = 1_000_000

Triple = tuple  # (term: str, doc: int, tf: int)
RecordLike = Union[DocumentRecord, bytes]

_RUN_HEAD = struct.Struct("<H")
_RUN_TAIL = struct.Struct("<QI")


def doc_triples(doc: int, body: str) -> tuple[list[Triple], int]:
    terms = tokenize(body)
    return [(t, doc, tf) for t, tf in Counter(terms).items()], len(terms)


def _checked(run: Iterable[Triple], index: int) -> Iterator[Triple]:
    prev = None
    for item in run:
        key = (item[0], item[1])
        if prev is not None and not prev < key:
            raise CorruptRunError(index, f"{key!r} does not follow {prev!r}")
        prev = key
        yield item


def merge_runs(
    runs: Sequence[Iterable[Triple]],
    *,
    partition_id: int = 0,
    doc_table: Sequence[DocInfo] | None = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> SubIndex:
    """k-way merge of sorted runs into a SubIndex.

    Without a doc table, N is taken as one past the largest doc id and
    documents get empty urls and a length equal to their summed tf.
    Entries for the same (term, doc) in several runs have their tf added.
    """
    merged = heapq.merge(*(_checked(r, i) for i, r in enumerate(runs)))
    grouped: list[tuple[str, list[int], list[int]]] = []
    for term, items in groupby(merged, key=itemgetter(0)):
        docs: list[int] = []
        tfs: list[int] = []
        for _, doc, tf in items:
            if docs and docs[-1] == doc:
                tfs[-1] += tf
            else:
                docs.append(doc)
                tfs.append(tf)
        grouped.append((term, docs, tfs))

    if doc_table is None:
        n_docs = 1 + max((docs[-1] for _, docs, _ in grouped), default=-1)
        lengths = [0] * n_docs
        for _, docs, tfs in grouped:
            for d, tf in zip(docs, tfs):
                lengths[d] += tf
        doc_table = [DocInfo("", n) for n in lengths]
    n_docs = len(doc_table)

    chunks = []
    infos = []
    offset = 0
    for term, docs, tfs in grouped:
        if docs[-1] >= n_docs:
            raise CorruptRunError(-1, f"doc {docs[-1]} outside the doc table")
        data = encode_postings(docs, tfs, n_docs)
        chunks.append(data)
        infos.append(TermInfo(len(docs), offset, len(data)))
        offset += len(data)
    lexicon = front_code([t for t, _, _ in grouped], block_size, infos)
    return SubIndex(partition_id, list(doc_table), lexicon, MemoryPostings(b"".join(chunks)))


# run files

def write_run(path: str, triples: Iterable[Triple]) -> None:
    with open(path, "wb") as f:
        for term, doc, tf in triples:
            raw = term.encode("utf-8")
            f.write(_RUN_HEAD.pack(len(raw)) + raw + _RUN_TAIL.pack(doc, tf))


def read_run(path: str) -> Iterator[Triple]:
    with open(path, "rb") as f:
        data = f.read()
    pos = 0
    while pos < len(data):
        (n,) = _RUN_HEAD.unpack_from(data, pos)
        pos += 2
        term = data[pos:pos + n].decode("utf-8")
        pos += n
        doc, tf = _RUN_TAIL.unpack_from(data, pos)
        pos += _RUN_TAIL.size
        yield term, doc, tf


class _RunWriter:
    """Accumulates triples and flushes a sorted run every `run_size` triples."""

    def __init__(self, run_dir: str | None, run_size: int, tag: str):
        self.run_dir = run_dir
        self.run_size = run_size
        self.tag = tag
        self.buffer: list[Triple] = []
        self.runs: list = []  # in-memory lists, or file paths when run_dir is set
        self.docs: list[tuple[int, str, int]] = []

    def add(self, doc: int, rec: DocumentRecord) -> None:
        triples, length = doc_triples(doc, rec.body)
        self.docs.append((doc, rec.url, length))
        self.buffer.extend(triples)
        if len(self.buffer) >= self.run_size:
            self.flush()

    def flush(self) -> None:
        if not self.buffer:
            return
        self.buffer.sort(key=lambda t: (t[0], t[1]))
        if self.run_dir is None:
            self.runs.append(self.buffer)
        else:
            path = os.path.join(self.run_dir, f"run-{self.tag}-{len(self.runs)}")
            write_run(path, self.buffer)
            self.runs.append(path)
        self.buffer = []


def _worker(tasks, results, corpus_path, run_dir, run_size, tag):
    writer = _RunWriter(run_dir, run_size, tag)
    corpus = open(corpus_path, "rb") if corpus_path else None
    try:
        while True:
            task = tasks.get()
            if task is None:
                break
            doc, payload = task
            if corpus is not None:
                offset, length = payload
                corpus.seek(offset)
                payload = corpus.read(length)
            rec = parse_record(payload) if isinstance(payload, bytes) else payload
            writer.add(doc, rec)
        writer.flush()
        results.put((writer.runs, writer.docs, None))
    except Exception as e:  # reported to the master, which re-raises
        while tasks.get() is not None:  # keep the master from blocking on a full queue
            pass
        results.put(([], [], repr(e)))
    finally:
        if corpus is not None:
            corpus.close()


def _accept(item: RecordLike) -> DocumentRecord:
    if isinstance(item, DocumentRecord):
        return check_record(item)
    return parse_record(item)


def _build(
    tasks_iter: Iterator[tuple[int, object]],
    partition_id: int,
    workers: int,
    corpus_path: str | None,
    run_size: int,
    block_size: int,
) -> SubIndex:
    if workers < 1:
        raise ValueError("workers must be >= 1")

    if workers == 1:
        writer = _RunWriter(None, run_size, "0")
        corpus = open(corpus_path, "rb") if corpus_path else None
        try:
            for doc, payload in tasks_iter:
                if corpus is not None:
                    corpus.seek(payload[0])
                    payload = parse_record(corpus.read(payload[1]))
                writer.add(doc, payload)
        finally:
            if corpus is not None:
                corpus.close()
        writer.flush()
        runs, docs = writer.runs, writer.docs
        return _assemble(runs, docs, partition_id, block_size)

    ctx = mp.get_context("fork")
    tasks = ctx.Queue(maxsize=4 * workers)
    results = ctx.Queue()
    with tempfile.TemporaryDirectory(prefix="mose-runs-") as run_dir:
        procs = [
            ctx.Process(target=_worker,
                        args=(tasks, results, corpus_path, run_dir, run_size, str(w)),
                        daemon=True)
            for w in range(workers)
        ]
        for p in procs:
            p.start()
        try:
            for task in tasks_iter:
                tasks.put(task)
        finally:
            for _ in procs:
                tasks.put(None)
        run_paths, docs, errors = [], [], []
        for _ in procs:
            r, d, err = results.get()
            run_paths += r
            docs += d
            if err:
                errors.append(err)
        for p in procs:
            p.join()
        if errors:
            raise RuntimeError(f"indexing worker failed: {errors[0]}")
        runs = [read_run(path) for path in run_paths]
        return _assemble(runs, docs, partition_id, block_size)


def _assemble(runs, docs, partition_id, block_size) -> SubIndex:
    docs.sort()
    if [d for d, _, _ in docs] != list(range(len(docs))):
        raise RuntimeError("document ids are not dense; a document was lost")
    table = [DocInfo(url, length) for _, url, length in docs]
    return merge_runs(runs, partition_id=partition_id, doc_table=table, block_size=block_size)


def build_subindex(
    records: Iterable[RecordLike],
    partition_id: int = 0,
    workers: int = 1,
    *,
    run_size: int = RUN_SIZE,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> SubIndex:
    """Index a stream of records (DocumentRecord or raw corpus lines).

    Malformed records are skipped; their count is left in ``.skipped``.
    """
    skipped = [0]

    def tasks():
        doc = 0
        for item in records:
            try:
                rec = _accept(item)
            except MalformedRecordError as e:
                skipped[0] += 1
                log.debug("skipping record: %s", e)
                continue
            yield doc, rec
            doc += 1

    idx = _build(tasks(), partition_id, workers, None, run_size, block_size)
    idx.skipped = skipped[0]
    return idx


def build_subindex_file(
    path: str | os.PathLike,
    partition_id: int = 0,
    workers: int = 1,
    *,
    run_size: int = RUN_SIZE,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> SubIndex:
    """Index a corpus file; the master sends workers only (offset, length) references."""
    skipped = [0]

    def tasks():
        doc = 0
        for offset, line in iter_lines(path):
            try:
                parse_record(line)
            except MalformedRecordError as e:
                skipped[0] += 1
                log.debug("skipping line at offset %d: %s", offset, e)
                continue
            yield doc, (offset, len(line))
            doc += 1

    idx = _build(tasks(), partition_id, workers, os.fspath(path), run_size, block_size)
    idx.skipped = skipped[0]
    return idx
