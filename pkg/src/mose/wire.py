"""Framed binary protocol between clients, brokers and searchers.

Frame: ``length u32 LE`` (bytes that follow, type byte included), ``type u8``,
payload.  All integers little-endian.

    QUERY    0x01  query_id u64, l u16, text_len u16, UTF-8 text
    HITS     0x02  query_id u64, flags u8 (bit0 = error), count u16,
                   count x (doc u64, score f32)
    PING     0x03
    PONG     0x04
    SHUTDOWN 0x05
"""

from __future__ import annotations

import math
import socket
import struct
from dataclasses import dataclass
from typing import Union

from mose.errors import (
    BadPayloadError,
    BadTypeError,
    CountMismatchError,
    FrameTooLargeError,
    ShortFrameError,
    TrailingBytesError,
)
from mose.model import DocId, ScoredHit

MAX_FRAME = 1 << 20

QUERY, HITS, PING, PONG, SHUTDOWN = 0x01, 0x02, 0x03, 0x04, 0x05
FLAG_ERROR = 0x01

_LEN = struct.Struct("<I")
_QUERY = struct.Struct("<QHH")
_HITS = struct.Struct("<QBH")
_HIT = struct.Struct("<Qf")


@dataclass(frozen=True)
class Query:
    query_id: int
    l: int
    text: str


@dataclass(frozen=True)
class Hits:
    query_id: int
    hits: tuple[ScoredHit, ...] = ()
    error: bool = False
    flags: int = 0  # bits other than the error bit, preserved for roundtrips


@dataclass(frozen=True)
class Ping:
    pass


@dataclass(frozen=True)
class Pong:
    pass


@dataclass(frozen=True)
class Shutdown:
    pass


Message = Union[Query, Hits, Ping, Pong, Shutdown]

_EMPTY = {PING: Ping(), PONG: Pong(), SHUTDOWN: Shutdown()}
_EMPTY_TYPES = {Ping: PING, Pong: PONG, Shutdown: SHUTDOWN}


def encode_message(m: Message) -> bytes:
    if isinstance(m, Query):
        text = m.text.encode("utf-8")
        body = bytes([QUERY]) + _QUERY.pack(m.query_id, m.l, len(text)) + text
    elif isinstance(m, Hits):
        flags = (m.flags & ~FLAG_ERROR) | (FLAG_ERROR if m.error else 0)
        parts = [bytes([HITS]), _HITS.pack(m.query_id, flags, len(m.hits))]
        parts += [_HIT.pack(h.doc.pack(), h.score) for h in m.hits]
        body = b"".join(parts)
    else:
        body = bytes([_EMPTY_TYPES[type(m)]])
    if len(body) > MAX_FRAME:
        raise FrameTooLargeError(f"frame of {len(body)} bytes exceeds {MAX_FRAME}")
    return _LEN.pack(len(body)) + body


def decode_body(body: bytes) -> Message:
    """Decode the part of a frame after the length prefix."""
    if not body:
        raise ShortFrameError("frame has no type byte")
    mtype = body[0]
    payload = memoryview(body)[1:]
    if mtype in _EMPTY:
        if payload:
            raise TrailingBytesError(f"{len(payload)} bytes after an empty message")
        return _EMPTY[mtype]
    if mtype == QUERY:
        if len(payload) < _QUERY.size:
            raise ShortFrameError("QUERY header truncated")
        qid, l, tlen = _QUERY.unpack_from(payload, 0)
        end = _QUERY.size + tlen
        if len(payload) < end:
            raise ShortFrameError("QUERY text truncated")
        if len(payload) > end:
            raise TrailingBytesError(f"{len(payload) - end} bytes after QUERY text")
        try:
            text = bytes(payload[_QUERY.size:end]).decode("utf-8")
        except UnicodeDecodeError:
            raise BadPayloadError("QUERY text is not UTF-8") from None
        return Query(qid, l, text)
    if mtype == HITS:
        if len(payload) < _HITS.size:
            raise ShortFrameError("HITS header truncated")
        qid, flags, count = _HITS.unpack_from(payload, 0)
        groups, extra = divmod(len(payload) - _HITS.size, _HIT.size)
        if extra or groups != count:
            raise CountMismatchError(f"HITS count {count} but {len(payload) - _HITS.size} payload bytes")
        hits = []
        for doc, score in _HIT.iter_unpack(payload[_HITS.size:]):
            if not (math.isfinite(score) and score >= 0):
                raise BadPayloadError(f"invalid score {score}")
            hits.append(ScoredHit(DocId.unpack(doc), score))
        return Hits(qid, tuple(hits), bool(flags & FLAG_ERROR), flags & ~FLAG_ERROR)
    raise BadTypeError(f"unknown message type 0x{mtype:02x}")


def decode_message(frame: bytes) -> Message:
    """Decode exactly one complete frame."""
    if len(frame) < _LEN.size:
        raise ShortFrameError("frame shorter than its length prefix")
    (n,) = _LEN.unpack_from(frame, 0)
    if n > MAX_FRAME:
        raise FrameTooLargeError(f"declared length {n} exceeds {MAX_FRAME}")
    if len(frame) - _LEN.size < n:
        raise ShortFrameError(f"frame declares {n} bytes, has {len(frame) - _LEN.size}")
    if len(frame) - _LEN.size > n:
        raise TrailingBytesError("bytes after the end of the frame")
    return decode_body(frame[_LEN.size:])


class FrameBuffer:
    """Incremental decoder for a byte stream carrying back-to-back frames."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[Message]:
        self._buf += data
        out = []
        while len(self._buf) >= _LEN.size:
            (n,) = _LEN.unpack_from(self._buf, 0)
            if n > MAX_FRAME:
                raise FrameTooLargeError(f"declared length {n} exceeds {MAX_FRAME}")
            end = _LEN.size + n
            if len(self._buf) < end:
                break
            body = bytes(self._buf[_LEN.size:end])
            del self._buf[:end]
            out.append(decode_body(body))
        return out

    def pending(self) -> int:
        return len(self._buf)


def _recv_exact(sock: socket.socket, n: int) -> bytes | None:
    chunks = []
    while n:
        chunk = sock.recv(n)
        if not chunk:
            if chunks:
                raise ShortFrameError("connection closed mid-frame")
            return None
        chunks.append(chunk)
        n -= len(chunk)
    return b"".join(chunks)


def recv_message(sock: socket.socket) -> Message | None:
    """Blocking read of one message; None on a clean EOF between frames."""
    head = _recv_exact(sock, _LEN.size)
    if head is None:
        return None
    (n,) = _LEN.unpack(head)
    if n > MAX_FRAME:
        raise FrameTooLargeError(f"declared length {n} exceeds {MAX_FRAME}")
    body = _recv_exact(sock, n) if n else b""
    if body is None:
        raise ShortFrameError("connection closed mid-frame")
    return decode_body(body)


def send_message(sock: socket.socket, m: Message) -> None:
    sock.sendall(encode_message(m))


def parse_endpoint(s: str) -> tuple[str, int]:
    host, sep, port = s.strip().rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"endpoint {s!r} is not HOST:PORT")
    return host or "127.0.0.1", int(port)


def format_endpoint(addr: tuple[str, int]) -> str:
    return f"{addr[0]}:{addr[1]}"
