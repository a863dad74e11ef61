"""Throughput versus replication for TP (p=1) and Hybrid (p=2) on a synthetic corpus.

Writes one CSV row per (n, k, p), taking the median-throughput run of each.

    python3 scripts/throughput_experiment.py --out results/throughput.csv
"""

import argparse
import logging
import os
import tempfile

from mose.experiments import ThroughputConfig, throughput_sweep


def main():
    d = ThroughputConfig()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="throughput.csv")
    ap.add_argument("--workdir", help="keep corpus and indexes here instead of a temp dir")
    ap.add_argument("--docs", type=int, default=d.docs)
    ap.add_argument("--vocab", type=int, default=d.vocab)
    ap.add_argument("--queries", type=int, default=d.queries)
    ap.add_argument("--warmup", type=int, help="unmeasured queries per run (default: 10%% of --queries)")
    ap.add_argument("--clients", type=int, default=d.clients)
    ap.add_argument("--k", type=int, default=d.k)
    ap.add_argument("--repeats", type=int, default=d.repeats)
    ap.add_argument("--seed", type=int, default=d.seed)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    cfg = ThroughputConfig(docs=args.docs, vocab=args.vocab, queries=args.queries,
                           warmup=args.queries // 10 if args.warmup is None else args.warmup, clients=args.clients,
                           k=args.k, repeats=args.repeats, seed=args.seed)
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        result = throughput_sweep(cfg, args.workdir or tmp, args.out)

    print(f"cache per searcher: {result.cache_bytes} B; postings bytes per partition: {result.postings_bytes}")
    print(f"{'n':>3} {'TP qps':>9} {'Hybrid qps':>11} {'Hybrid/TP':>10}")
    for n in cfg.ns:
        tp, hy = result.qps(n, cfg.k, 1), result.qps(n, cfg.k, 2)
        print(f"{n:>3} {tp:>9.1f} {hy:>11.1f} {hy / tp:>10.2f}")
    print(f"all queries answered: {result.all_answered()}; csv: {args.out}")


if __name__ == "__main__":
    main()
