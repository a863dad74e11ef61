"""Blocked front-coded term dictionary.

Terms are kept as UTF-8 bytes and ordered byte-wise.  Every block stores its
first term whole; the rest are (shared-prefix length, suffix) against the
previous term, so a binary search over block heads picks the only block that
can hold a term and a short linear scan rebuilds terms inside it.
"""

from __future__ import annotations

import struct
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

from mose.errors import LexiconOrderError, TruncatedIndexError

DEFAULT_BLOCK_SIZE = 16

_ENTRY_HEAD = struct.Struct("<HH")
_ENTRY_TAIL = struct.Struct("<IQI")
_BLOCK_SIZE = struct.Struct("<H")


class TermInfo(NamedTuple):
    df: int
    postings_offset: int
    postings_len: int


@dataclass
class LexiconEntry:
    lcp_len: int
    suffix: bytes
    df: int
    postings_offset: int
    postings_len: int

    @property
    def info(self) -> TermInfo:
        return TermInfo(self.df, self.postings_offset, self.postings_len)


@dataclass
class LexiconBlock:
    head_term: bytes
    entries: list[LexiconEntry]

    def terms(self) -> Iterator[tuple[bytes, LexiconEntry]]:
        term = b""
        for e in self.entries:
            term = term[:e.lcp_len] + e.suffix
            yield term, e


@dataclass
class Lexicon:
    block_size: int
    blocks: list[LexiconBlock]
    term_count: int
    _heads: list[bytes] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self._heads = [blk.head_term for blk in self.blocks]

    def __len__(self) -> int:
        return self.term_count

    def items(self) -> Iterator[tuple[bytes, TermInfo]]:
        for blk in self.blocks:
            for term, e in blk.terms():
                yield term, e.info

    def terms(self) -> list[str]:
        return [t.decode("utf-8") for t, _ in self.items()]

    def lookup(self, term: str | bytes) -> TermInfo | None:
        return lexicon_lookup(self, term)

    def to_bytes(self) -> bytes:
        out = [_BLOCK_SIZE.pack(self.block_size)]
        for blk in self.blocks:
            for e in blk.entries:
                out.append(_ENTRY_HEAD.pack(e.lcp_len, len(e.suffix)))
                out.append(e.suffix)
                out.append(_ENTRY_TAIL.pack(e.df, e.postings_offset, e.postings_len))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, buf, term_count: int) -> Lexicon:
        buf = memoryview(buf)
        if len(buf) < _BLOCK_SIZE.size:
            raise TruncatedIndexError("lexicon section too short")
        (block_size,) = _BLOCK_SIZE.unpack_from(buf, 0)
        if block_size < 1 and term_count:
            raise TruncatedIndexError("lexicon block size is zero")
        pos = _BLOCK_SIZE.size
        blocks: list[LexiconBlock] = []
        entries: list[LexiconEntry] = []
        prev = b""
        for i in range(term_count):
            if pos + _ENTRY_HEAD.size > len(buf):
                raise TruncatedIndexError(f"lexicon truncated at term {i}")
            lcp, slen = _ENTRY_HEAD.unpack_from(buf, pos)
            pos += _ENTRY_HEAD.size
            if pos + slen + _ENTRY_TAIL.size > len(buf):
                raise TruncatedIndexError(f"lexicon truncated at term {i}")
            suffix = bytes(buf[pos:pos + slen])
            pos += slen
            df, off, plen = _ENTRY_TAIL.unpack_from(buf, pos)
            pos += _ENTRY_TAIL.size
            if i % block_size == 0:
                if lcp != 0:
                    raise TruncatedIndexError(f"block head {i} has lcp {lcp}")
                if entries:
                    blocks.append(LexiconBlock(entries[0].suffix, entries))
                entries = []
            elif lcp > len(prev):
                raise TruncatedIndexError(f"lcp {lcp} exceeds previous term at {i}")
            entries.append(LexiconEntry(lcp, suffix, df, off, plen))
            prev = prev[:lcp] + suffix
        if entries:
            blocks.append(LexiconBlock(entries[0].suffix, entries))
        if pos != len(buf):
            raise TruncatedIndexError("trailing bytes after lexicon")
        return cls(block_size, blocks, term_count)


def _common_prefix(a: bytes, b: bytes) -> int:
    n = min(len(a), len(b))
    i = 0
    while i < n and a[i] == b[i]:
        i += 1
    return i


def front_code(
    terms: Sequence[str | bytes],
    block_size: int = DEFAULT_BLOCK_SIZE,
    infos: Sequence[TermInfo] | None = None,
) -> Lexicon:
    """Front code strictly increasing terms into blocks of `block_size`."""
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    if infos is not None and len(infos) != len(terms):
        raise ValueError("terms and infos differ in length")
    blocks: list[LexiconBlock] = []
    prev: bytes | None = None
    for i, t in enumerate(terms):
        raw = t.encode("utf-8") if isinstance(t, str) else bytes(t)
        if prev is not None and not prev < raw:
            raise LexiconOrderError(f"term {i} {raw!r} does not follow {prev!r}")
        if len(raw) > 0xFFFF:
            raise ValueError(f"term {i} longer than 65535 bytes")
        info = infos[i] if infos is not None else TermInfo(0, 0, 0)
        if i % block_size == 0:
            blocks.append(LexiconBlock(raw, []))
            lcp = 0
        else:
            lcp = _common_prefix(prev, raw)
        blocks[-1].entries.append(LexiconEntry(lcp, raw[lcp:], *info))
        prev = raw
    return Lexicon(block_size, blocks, len(terms))


def lexicon_lookup(lex: Lexicon, term: str | bytes) -> TermInfo | None:
    """Binary search block heads, then scan the one candidate block."""
    raw = term.encode("utf-8") if isinstance(term, str) else term
    i = bisect_right(lex._heads, raw) - 1
    if i < 0:
        return None
    for t, e in lex.blocks[i].terms():
        if t == raw:
            return e.info
        if t > raw:
            return None
    return None
