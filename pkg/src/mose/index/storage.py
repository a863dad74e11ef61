"""The single-partition index and its file format.

Layout, little-endian::

    "MOSE" | version u32 | partition_id u16 | N u64 | term_count u64
    | (offset u64, len u64) x 3 for doc table, lexicon, postings
    | sections

Readers map the file once; the decoded lexicon and doc table are plain
objects shared read-only by every thread in the process, and postings are
read straight out of the mapping (or through a bounded cache, to emulate a
memory-constrained searcher).
"""

from __future__ import annotations

import mmap
import os
import struct
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import NamedTuple

from mose.errors import (
    BadMagicError,
    BadVersionError,
    CorruptIndexError,
    TruncatedIndexError,
)
from mose.index.codec import decode_postings
from mose.index.lexicon import Lexicon, TermInfo, lexicon_lookup

MAGIC = b"MOSE"
VERSION = 1

_HEADER = struct.Struct("<4sIHQQ")
_SECTIONS = struct.Struct("<6Q")
HEADER_SIZE = _HEADER.size + _SECTIONS.size
_URL_LEN = struct.Struct("<H")
_DOC_LEN = struct.Struct("<I")


class DocInfo(NamedTuple):
    url: str
    length: int


class _Postings:
    """Byte source for the postings region."""

    def read(self, offset: int, length: int) -> bytes:
        raise NotImplementedError

    def __len__(self) -> int:
        raise NotImplementedError

    def tobytes(self) -> bytes:
        return self.read(0, len(self))


class MemoryPostings(_Postings):
    def __init__(self, data):
        self.data = data

    def read(self, offset, length):
        return bytes(self.data[offset:offset + length])

    def __len__(self):
        return len(self.data)


class CachedFilePostings(_Postings):
    """Postings read with pread through an LRU cache holding at most `cache_bytes`."""

    def __init__(self, path, base: int, size: int, cache_bytes: int):
        self.fd = os.open(path, os.O_RDONLY)
        self.base = base
        self.size = size
        self.cache_bytes = cache_bytes
        self.cached = 0
        self.hits = 0
        self.misses = 0
        self._lru: OrderedDict[int, bytes] = OrderedDict()
        self._lock = threading.Lock()

    def read(self, offset, length):
        with self._lock:
            data = self._lru.get(offset)
            if data is not None and len(data) == length:
                self._lru.move_to_end(offset)
                self.hits += 1
                return data
            self.misses += 1
        data = os.pread(self.fd, length, self.base + offset)
        if len(data) != length:
            raise TruncatedIndexError("postings read past end of file")
        if length <= self.cache_bytes:
            with self._lock:
                if offset not in self._lru:
                    self._lru[offset] = data
                    self.cached += length
                while self.cached > self.cache_bytes:
                    _, old = self._lru.popitem(last=False)
                    self.cached -= len(old)
        return data

    def __len__(self):
        return self.size

    def close(self):
        os.close(self.fd)


@dataclass(eq=False)
class SubIndex:
    partition_id: int
    doc_table: list[DocInfo]
    lexicon: Lexicon
    postings: _Postings
    skipped: int = field(default=0)

    @property
    def doc_count(self) -> int:
        return len(self.doc_table)

    def lookup(self, term: str) -> TermInfo | None:
        return lexicon_lookup(self.lexicon, term)

    def postings_of(self, term: str) -> tuple[list[int], list[int]]:
        """(local doc ids, term frequencies) of `term`; empty lists if absent."""
        info = self.lookup(term)
        if info is None:
            return [], []
        return self.decode(info)

    def decode(self, info: TermInfo) -> tuple[list[int], list[int]]:
        data = self.postings.read(info.postings_offset, info.postings_len)
        try:
            docs, tfs = decode_postings(data, info.df, self.doc_count)
        except ValueError as e:
            raise CorruptIndexError(f"corrupt postings: {e}") from None
        if docs and docs[-1] >= self.doc_count:
            raise CorruptIndexError("posting refers past the doc table")
        return docs, tfs

    def __eq__(self, other):
        if not isinstance(other, SubIndex):
            return NotImplemented
        return (
            self.partition_id == other.partition_id
            and self.doc_table == other.doc_table
            and self.lexicon == other.lexicon
            and self.postings.tobytes() == other.postings.tobytes()
        )

    def to_bytes(self) -> bytes:
        docs = []
        for info in self.doc_table:
            url = info.url.encode("utf-8")
            docs.append(_URL_LEN.pack(len(url)) + url + _DOC_LEN.pack(info.length))
        sections = [b"".join(docs), self.lexicon.to_bytes(), self.postings.tobytes()]
        table = []
        offset = HEADER_SIZE
        for s in sections:
            table += [offset, len(s)]
            offset += len(s)
        header = _HEADER.pack(MAGIC, VERSION, self.partition_id, self.doc_count,
                              self.lexicon.term_count)
        return b"".join([header, _SECTIONS.pack(*table), *sections])


def write_subindex(idx: SubIndex, path: str | os.PathLike) -> int:
    data = idx.to_bytes()
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)
    return len(data)


def _parse_doc_table(buf, n_docs: int) -> list[DocInfo]:
    docs = []
    pos = 0
    for i in range(n_docs):
        if pos + 2 > len(buf):
            raise TruncatedIndexError(f"doc table truncated at doc {i}")
        (ulen,) = _URL_LEN.unpack_from(buf, pos)
        pos += 2
        if pos + ulen + 4 > len(buf):
            raise TruncatedIndexError(f"doc table truncated at doc {i}")
        try:
            url = bytes(buf[pos:pos + ulen]).decode("utf-8")
        except UnicodeDecodeError:
            raise CorruptIndexError(f"doc {i} url is not UTF-8") from None
        pos += ulen
        (length,) = _DOC_LEN.unpack_from(buf, pos)
        pos += 4
        docs.append(DocInfo(url, length))
    if pos != len(buf):
        raise CorruptIndexError("trailing bytes after doc table")
    return docs


def parse_header(buf) -> tuple[int, int, int, list[tuple[int, int]]]:
    if len(buf) < 4 or bytes(buf[:4]) != MAGIC:
        raise BadMagicError("not a MOSE index (bad magic)")
    if len(buf) < HEADER_SIZE:
        raise TruncatedIndexError("header truncated")
    _, version, partition_id, n_docs, term_count = _HEADER.unpack_from(buf, 0)
    if version != VERSION:
        raise BadVersionError(f"unsupported index version {version}")
    t = _SECTIONS.unpack_from(buf, _HEADER.size)
    sections = [(t[0], t[1]), (t[2], t[3]), (t[4], t[5])]
    for off, ln in sections:
        if off < HEADER_SIZE or off + ln > len(buf):
            raise TruncatedIndexError("section lies outside the file")
    return partition_id, n_docs, term_count, sections


def load_subindex(buf, cache_source=None) -> SubIndex:
    """Decode an index held in a bytes-like buffer (a file mapping or bytes)."""
    partition_id, n_docs, term_count, sections = parse_header(buf)
    view = memoryview(buf)
    (doff, dlen), (loff, llen), (poff, plen) = sections
    doc_table = _parse_doc_table(view[doff:doff + dlen], n_docs)
    lexicon = Lexicon.from_bytes(view[loff:loff + llen], term_count)
    for _, info in lexicon.items():
        if info.postings_offset + info.postings_len > plen:
            raise CorruptIndexError("postings offset outside the postings region")
        if info.df < 1 or info.df > n_docs:
            raise CorruptIndexError(f"df {info.df} out of range")
    if cache_source is not None:
        path, cache_bytes = cache_source
        postings: _Postings = CachedFilePostings(path, poff, plen, cache_bytes)
    else:
        postings = MemoryPostings(view[poff:poff + plen])
    return SubIndex(partition_id, doc_table, lexicon, postings)


def read_subindex(path: str | os.PathLike, cache_bytes: int | None = None) -> SubIndex:
    """Map an index file read-only.

    With `cache_bytes` set, postings are not mapped but read from disk through
    an LRU cache of that many bytes.
    """
    with open(path, "rb") as f:
        size = os.fstat(f.fileno()).st_size
        if size == 0:
            raise BadMagicError("empty index file")
        mapped = mmap.mmap(f.fileno(), 0, access=mmap.ACCESS_READ)
    source = (path, cache_bytes) if cache_bytes is not None else None
    return load_subindex(mapped, source)
