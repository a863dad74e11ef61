from mose.index.build import build_subindex, build_subindex_file, merge_runs
from mose.index.codec import (
    gamma_decode,
    gamma_encode,
    golomb_decode,
    golomb_encode,
    golomb_parameter,
)
from mose.index.corpus import DocumentRecord, read_corpus, write_corpus
from mose.index.lexicon import Lexicon, front_code, lexicon_lookup
from mose.index.storage import DocInfo, SubIndex, read_subindex, write_subindex
from mose.index.text import tokenize

__all__ = [
    "DocInfo", "DocumentRecord", "Lexicon", "SubIndex", "build_subindex",
    "build_subindex_file", "front_code", "gamma_decode", "gamma_encode",
    "golomb_decode", "golomb_encode", "golomb_parameter", "lexicon_lookup",
    "merge_runs", "read_corpus", "read_subindex", "tokenize", "write_corpus",
    "write_subindex",
]
