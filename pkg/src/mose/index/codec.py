"""Bit-level codecs for posting lists.

Bitstreams are handled as ``str`` of ``"0"``/``"1"`` characters while being
built or consumed, which keeps the hot loops in C (``str.find``, ``int(s, 2)``)
and packs into bytes MSB-first, zero padded to a byte boundary.

Document gaps are Golomb coded with a per-term parameter (the local Bernoulli
model), term frequencies with Elias gamma, interleaved gap/tf per posting.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

from mose.errors import InvalidGapError, TruncatedStreamError, UndefinedParameterError


def pack_bits(bits: str) -> bytes:
    if not bits:
        return b""
    nbytes = (len(bits) + 7) // 8
    return int(bits.ljust(nbytes * 8, "0"), 2).to_bytes(nbytes, "big")


def unpack_bits(data: bytes) -> str:
    if not data:
        return ""
    return bin(int.from_bytes(data, "big"))[2:].zfill(len(data) * 8)


def golomb_parameter(n_docs: int, df: int) -> int:
    """b = max(1, ceil(0.69 * N / f_t)), computed in exact integer arithmetic."""
    if df < 1:
        raise UndefinedParameterError("Golomb parameter undefined for df=0")
    if df > n_docs:
        raise ValueError(f"df={df} exceeds N={n_docs}")
    return max(1, -(-69 * n_docs // (100 * df)))


@lru_cache(maxsize=4096)
def _truncated_binary(b: int) -> tuple[int, int]:
    k = (b - 1).bit_length()
    return k, (1 << k) - b


def _golomb_bits(g: int, b: int, k: int, u: int) -> str:
    q, r = divmod(g - 1, b)
    head = "1" * q + "0"
    if k == 0:
        return head
    if r < u:
        return head + format(r, "b").zfill(k - 1) if k > 1 else head
    return head + format(r + u, "b").zfill(k)


def golomb_encode(gaps: Iterable[int], b: int) -> str:
    """Golomb code each gap: unary quotient, truncated-binary remainder."""
    if b < 1:
        raise ValueError(f"Golomb parameter must be >= 1, got {b}")
    k, u = _truncated_binary(b)
    out = []
    for g in gaps:
        if g < 1:
            raise InvalidGapError(f"gap {g} < 1")
        out.append(_golomb_bits(g, b, k, u))
    return "".join(out)


def gamma_encode(values: Iterable[int]) -> str:
    out = []
    for x in values:
        if x < 1:
            raise ValueError(f"gamma code needs x >= 1, got {x}")
        body = format(x, "b")
        out.append("0" * (len(body) - 1) + body)
    return "".join(out)


class BitReader:
    """Sequential reader over a bit string."""

    __slots__ = ("bits", "pos")

    def __init__(self, bits: str, pos: int = 0):
        self.bits = bits
        self.pos = pos

    @classmethod
    def from_bytes(cls, data: bytes) -> BitReader:
        return cls(unpack_bits(data))

    def remaining(self) -> int:
        return len(self.bits) - self.pos

    def read_golomb(self, b: int) -> int:
        k, u = _truncated_binary(b)
        return _read_golomb(self, b, k, u)

    def read_gamma(self) -> int:
        s, pos = self.bits, self.pos
        one = s.find("1", pos)
        if one < 0:
            raise TruncatedStreamError("stream exhausted inside gamma prefix")
        end = 2 * one - pos + 1
        if end > len(s):
            raise TruncatedStreamError("stream exhausted inside gamma body")
        self.pos = end
        return int(s[one:end], 2)


def _read_golomb(reader: BitReader, b: int, k: int, u: int) -> int:
    s, pos = reader.bits, reader.pos
    zero = s.find("0", pos)
    if zero < 0:
        raise TruncatedStreamError("stream exhausted inside unary quotient")
    q = zero - pos
    pos = zero + 1
    r = 0
    if k:
        if pos + k - 1 > len(s):
            raise TruncatedStreamError("stream exhausted inside remainder")
        x = int(s[pos:pos + k - 1], 2) if k > 1 else 0
        pos += k - 1
        if x >= u:
            if pos >= len(s):
                raise TruncatedStreamError("stream exhausted inside remainder")
            x = 2 * x + (s[pos] == "1")
            pos += 1
            x -= u
        r = x
    reader.pos = pos
    return q * b + r + 1


def _reader(bits: str | BitReader) -> BitReader:
    return bits if isinstance(bits, BitReader) else BitReader(bits)


def golomb_decode(bits: str | BitReader, b: int, count: int) -> list[int]:
    """Inverse of `golomb_encode`; a passed BitReader is left just past the last codeword."""
    if b < 1:
        raise ValueError(f"Golomb parameter must be >= 1, got {b}")
    reader = _reader(bits)
    k, u = _truncated_binary(b)
    return [_read_golomb(reader, b, k, u) for _ in range(count)]


def gamma_decode(bits: str | BitReader, count: int) -> list[int]:
    reader = _reader(bits)
    return [reader.read_gamma() for _ in range(count)]


def encode_postings(docs: Sequence[int], tfs: Sequence[int], n_docs: int) -> bytes:
    """Byte-aligned posting list: per posting, Golomb(gap) then gamma(tf).

    The first gap is measured from a virtual document -1, so gaps are >= 1.
    """
    if len(docs) != len(tfs):
        raise ValueError("docs and tfs differ in length")
    b = golomb_parameter(n_docs, len(docs))
    k, u = _truncated_binary(b)
    out = []
    prev = -1
    for d, tf in zip(docs, tfs):
        gap = d - prev
        if gap < 1:
            raise InvalidGapError(f"doc {d} does not follow {prev}")
        if tf < 1:
            raise ValueError(f"tf {tf} < 1")
        out.append(_golomb_bits(gap, b, k, u))
        body = format(tf, "b")
        out.append("0" * (len(body) - 1) + body)
        prev = d
    return pack_bits("".join(out))


def decode_postings(data: bytes, df: int, n_docs: int) -> tuple[list[int], list[int]]:
    """Inverse of `encode_postings`; returns (local doc ids, term frequencies)."""
    if df == 0:
        return [], []
    b = golomb_parameter(n_docs, df)
    k, u = _truncated_binary(b)
    reader = BitReader(unpack_bits(data))
    docs: list[int] = []
    tfs: list[int] = []
    doc = -1
    read_gamma = reader.read_gamma
    for _ in range(df):
        doc += _read_golomb(reader, b, k, u)
        docs.append(doc)
        tfs.append(read_gamma())
    return docs, tfs
