"""Run one query log through several topologies and report whether the result lists agree."""

import argparse
import tempfile
from pathlib import Path

from mose.bench import synth_corpus, synth_query_log
from mose.client import QueryClient
from mose.cluster import ClusterConfig, launch
from mose.experiments import build_partitions
from mose.wire import Hits, encode_message

TOPOLOGIES = [(1, 1, 1), (1, 1, 2), (1, 1, 4), (2, 2, 1), (2, 2, 2)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--docs", type=int, default=2000)
    ap.add_argument("--vocab", type=int, default=10_000)
    ap.add_argument("--queries", type=int, default=300)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        corpus = synth_corpus(args.docs, args.vocab, 1.0, args.seed, Path(tmp) / "corpus.txt")
        queries = synth_query_log(args.queries, args.vocab, 1.0, args.seed)
        indexes = {p: build_partitions(corpus, p, tmp) for p in {t[2] for t in TOPOLOGIES}}
        outputs = {}
        for n, k, p in TOPOLOGIES:
            with launch(ClusterConfig.local(n, k, p, 10, indexes[p])) as topo, \
                    QueryClient(topo.qa_endpoints[0]) as client:
                outputs[(n, k, p)] = [encode_message(Hits(0, h.hits, h.error))
                                      for h in (client.ask(q, 10) for q in queries)]
    ref = outputs[TOPOLOGIES[0]]
    for label, out in outputs.items():
        same = sum(a == b for a, b in zip(out, ref))
        print(f"{label}: {same}/{len(ref)} identical to {TOPOLOGIES[0]}")


if __name__ == "__main__":
    main()
