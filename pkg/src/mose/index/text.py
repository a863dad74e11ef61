"""Word-based tokenization shared by the indexer and the query parser."""

from __future__ import annotations

import re

MAX_TERM_BYTES = 64

# \w is isalnum() plus "_"; excluding "_" leaves exactly the alphanumerics.
_WORD = re.compile(r"[^\W_]+")


def normalize_term(word: str) -> str:
    term = word.lower()
    raw = term.encode("utf-8")
    if len(raw) > MAX_TERM_BYTES:
        # errors="ignore" drops a multibyte character cut in half
        term = raw[:MAX_TERM_BYTES].decode("utf-8", errors="ignore")
    return term


def tokenize(body: str) -> list[str]:
    """Lowercased maximal alphanumeric runs of `body`, in document order."""
    return [normalize_term(m.group()) for m in _WORD.finditer(body)]


def iter_words(text: str):
    """Yield (start offset, raw word) for each alphanumeric run."""
    for m in _WORD.finditer(text):
        yield m.start(), m.group()
