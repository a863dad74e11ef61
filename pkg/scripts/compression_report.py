"""Postings size against a 4-bytes-per-posting baseline, over a few corpus sizes."""

import argparse
import tempfile
from pathlib import Path

from mose.bench import synth_corpus
from mose.experiments import compression_stats
from mose.index import build_subindex_file, write_subindex


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--docs", type=int, nargs="+", default=[1000, 5000, 20000])
    ap.add_argument("--vocab", type=int, default=10_000)
    ap.add_argument("--zipf", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    print("docs,terms,postings,postings_bytes,baseline_bytes,ratio,index_bytes")
    with tempfile.TemporaryDirectory() as tmp:
        for docs in args.docs:
            corpus = synth_corpus(docs, args.vocab, args.zipf, args.seed, Path(tmp) / f"c{docs}")
            idx = build_subindex_file(corpus)
            s = compression_stats(idx, write_subindex(idx, Path(tmp) / f"i{docs}"))
            print(f"{docs},{s.terms},{s.postings},{s.postings_bytes},{s.baseline_bytes},{s.ratio:.4f},"
                  f"{s.index_bytes}")


if __name__ == "__main__":
    main()
