"""``mose`` command line."""

from __future__ import annotations

import argparse
import logging
import signal
import sys
import threading

from mose import __version__


def _cmd_partition(args) -> int:
    from mose.cluster import partition_corpus

    res = partition_corpus(args.input, args.parts, args.out)
    for path, size in zip(res.paths, res.sizes):
        print(f"{path}\t{size}")
    if res.skipped:
        print(f"skipped {res.skipped} malformed records", file=sys.stderr)
    return 0


def _cmd_index(args) -> int:
    from mose.index import build_subindex_file, write_subindex

    idx = build_subindex_file(args.input, args.partition_id, args.workers)
    size = write_subindex(idx, args.out)
    postings = sum(info.df for _, info in idx.lexicon.items())
    print(f"partition {idx.partition_id}: {idx.doc_count} docs, {idx.lexicon.term_count} terms, "
          f"{postings} postings, {len(idx.postings)} postings bytes "
          f"({len(idx.postings) / max(1, 4 * postings):.1%} of 4 bytes/posting), {size} bytes total")
    if idx.skipped:
        print(f"skipped {idx.skipped} malformed records", file=sys.stderr)
    return 0


def _cmd_ls(args) -> int:
    from mose.index import read_subindex
    from mose.searcher import serve

    idx = read_subindex(args.index, cache_bytes=args.cache_bytes)
    serve(idx, args.listen, args.l)
    return 0


def _cmd_qb(args) -> int:
    from mose.broker import serve_qa

    searchers = [s for s in args.searchers.split(",") if s]
    serve_qa(args.listen, searchers, args.k, args.l, args.timeout_ms / 1000.0)
    return 0


def _cmd_launch(args) -> int:
    from mose.cluster import ClusterConfig, launch, strategy_of

    cfg = ClusterConfig.load(args.config)
    stop = threading.Event()
    signal.signal(signal.SIGTERM, lambda *_: stop.set())
    topo = launch(cfg)
    print(f"{strategy_of(cfg).value} topology up ({cfg.label}); QAs at {', '.join(cfg.qa_endpoints)}",
          flush=True)
    try:
        while not stop.wait(0.5):
            pass
    except KeyboardInterrupt:
        pass
    return 0 if topo.shutdown() else 1


def _cmd_query(args) -> int:
    from mose.client import QueryClient
    from mose.errors import QueryFailed
    from mose.index import read_subindex

    tables = [read_subindex(path).doc_table for path in args.index or []]
    try:
        with QueryClient(args.qa) as client:
            hits = client.query(args.text, args.l)
    except (QueryFailed, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    for hit in hits:
        g = hit.doc.local
        fields = [str(hit.doc.pack()), f"{hit.score:.6g}"]
        if tables:
            part, local = g % len(tables), g // len(tables)
            if local < len(tables[part]):
                fields.append(tables[part][local].url)
        print("\t".join(fields))
    return 0


def _cmd_bench(args) -> int:
    from mose.bench import BenchConfig, load_query_log, replay, write_latency_csv, write_report_csv
    from mose.cluster import ClusterConfig

    if args.config:
        cluster = ClusterConfig.load(args.config)
        qas, topology = cluster.qa_endpoints, (cluster.n, cluster.k, cluster.p)
    elif args.qa:
        qas = [q for q in args.qa.split(",") if q]
        topology = (len(qas), "", "")
    else:
        print("bench needs --qa or --config", file=sys.stderr)
        return 2
    cfg = BenchConfig(load_query_log(args.log), qas, args.clients, args.queries, args.warmup,
                      args.l, topology)
    try:
        report = replay(cfg)
    except ConnectionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    write_report_csv([report], args.csv, append=args.append)
    if args.latency_csv:
        write_latency_csv(report, args.latency_csv)
    print(",".join(str(v) for v in report.row().values()))
    return 0


def _cmd_synth(args) -> int:
    from mose.bench import synth_corpus, synth_query_log

    synth_corpus(args.docs, args.vocab, args.zipf, args.seed, args.out, args.doc_len)
    if args.log:
        synth_query_log(args.log_queries, args.vocab, args.zipf, args.seed, args.log)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mose", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="round-robin a corpus into p subcollections")
    p.add_argument("--input", required=True)
    p.add_argument("--parts", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_partition)

    p = sub.add_parser("index", help="build one partition's index")
    p.add_argument("--input", required=True)
    p.add_argument("--partition-id", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("ls", help="run a Local Searcher")
    p.add_argument("--index", required=True)
    p.add_argument("--listen", required=True)
    p.add_argument("--l", type=int, default=10)
    p.add_argument("--cache-bytes", type=int, default=None,
                   help="read postings through an LRU cache of this size instead of mapping them")
    p.set_defaults(func=_cmd_ls)

    p = sub.add_parser("qb", help="run a Query Analyzer with k brokers")
    p.add_argument("--listen", required=True)
    p.add_argument("--searchers", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--l", type=int, default=10)
    p.add_argument("--timeout-ms", type=int, default=5000)
    p.set_defaults(func=_cmd_qb)

    p = sub.add_parser("launch", help="start a whole topology from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_launch)

    p = sub.add_parser("query", help="send one query to a QA")
    p.add_argument("--qa", required=True)
    p.add_argument("--l", type=int, default=10)
    p.add_argument("--index", action="append",
                   help="partition index files, in partition order, to print urls")
    p.add_argument("text")
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("bench", help="replay a query log and report throughput")
    p.add_argument("--qa")
    p.add_argument("--config")
    p.add_argument("--log", required=True)
    p.add_argument("--clients", type=int, default=1)
    p.add_argument("--queries", type=int, default=100)
    p.add_argument("--warmup", type=int, default=0)
    p.add_argument("--l", type=int, default=10)
    p.add_argument("--csv", required=True)
    p.add_argument("--append", action="store_true")
    p.add_argument("--latency-csv")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("synth", help="write a synthetic Zipf corpus")
    p.add_argument("--docs", type=int, required=True)
    p.add_argument("--vocab", type=int, required=True)
    p.add_argument("--zipf", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--doc-len", type=int, default=100)
    p.add_argument("--out", required=True)
    p.add_argument("--log", help="also write a random query log here")
    p.add_argument("--log-queries", type=int, default=1000)
    p.set_defaults(func=_cmd_synth)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * args.verbose
    logging.basicConfig(level=level, format="%(asctime)s %(process)d %(name)s %(levelname)s %(message)s")
    return args.func(args)
