"""Corpus files: one document per line, ``url TAB body``.

Tabs, newlines and backslashes inside fields are escaped as ``\\t``, ``\\n``
and ``\\\\``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator

from mose.errors import MalformedRecordError

MAX_URL_BYTES = 0xFFFF

_ESCAPES = {"t": "\t", "n": "\n", "\\": "\\"}


@dataclass(frozen=True)
class DocumentRecord:
    url: str
    body: str


def escape_field(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def unescape_field(s: str) -> str:
    if "\\" not in s:
        return s
    out = []
    i = 0
    while i < len(s):
        c = s[i]
        if c == "\\" and i + 1 < len(s) and s[i + 1] in _ESCAPES:
            out.append(_ESCAPES[s[i + 1]])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def format_record(rec: DocumentRecord) -> bytes:
    return (escape_field(rec.url) + "\t" + escape_field(rec.body) + "\n").encode("utf-8")


def check_record(rec: DocumentRecord) -> DocumentRecord:
    if not rec.url:
        raise MalformedRecordError("empty url")
    if len(rec.url.encode("utf-8")) > MAX_URL_BYTES:
        raise MalformedRecordError("url longer than 65535 bytes")
    return rec


def parse_record(line: bytes) -> DocumentRecord:
    """Parse one corpus line (trailing newline optional)."""
    if line.endswith(b"\n"):
        line = line[:-1]
    if line.endswith(b"\r"):
        line = line[:-1]
    try:
        text = line.decode("utf-8")
    except UnicodeDecodeError as e:
        raise MalformedRecordError(f"invalid UTF-8: {e}") from None
    url, tab, body = text.partition("\t")
    if not tab:
        raise MalformedRecordError("no TAB separator")
    return check_record(DocumentRecord(unescape_field(url), unescape_field(body)))


def iter_lines(path: str | os.PathLike) -> Iterator[tuple[int, bytes]]:
    """Yield (byte offset, raw line) for every line of the file."""
    with open(path, "rb") as f:
        offset = 0
        for line in f:
            yield offset, line
            offset += len(line)


def read_corpus(path: str | os.PathLike) -> Iterator[DocumentRecord]:
    """Valid records of a corpus file; malformed lines are dropped."""
    for _, line in iter_lines(path):
        try:
            yield parse_record(line)
        except MalformedRecordError:
            continue


def write_corpus(path: str | os.PathLike, records) -> int:
    n = 0
    with open(path, "wb") as f:
        for rec in records:
            f.write(format_record(rec))
            n += 1
    return n
