"""Document identifiers and scored hits shared by searchers, brokers and the wire."""

from __future__ import annotations

import math
import struct
from typing import NamedTuple

PARTITION_BITS = 16
LOCAL_BITS = 48
MAX_PARTITION = (1 << PARTITION_BITS) - 1
MAX_LOCAL = (1 << LOCAL_BITS) - 1

_f32 = struct.Struct("<f")


class DocId(NamedTuple):
    """A document's partition number and its dense local sequence number.

    Tuple order equals the order of the packed u64 form.
    """

    partition: int
    local: int

    def pack(self) -> int:
        if not 0 <= self.partition <= MAX_PARTITION:
            raise ValueError(f"partition {self.partition} out of range")
        if not 0 <= self.local <= MAX_LOCAL:
            raise ValueError(f"local id {self.local} out of range")
        return (self.partition << LOCAL_BITS) | self.local

    @classmethod
    def unpack(cls, packed: int) -> DocId:
        return cls(packed >> LOCAL_BITS, packed & MAX_LOCAL)

    def to_global(self, parts: int) -> DocId:
        """Monolithic DocId of this document under round-robin partitioning into `parts`."""
        if self.partition >= parts:
            raise ValueError(f"partition {self.partition} >= {parts}")
        return DocId(0, self.local * parts + self.partition)


class ScoredHit(NamedTuple):
    doc: DocId
    score: float


def rank_key(hit: ScoredHit) -> tuple[float, DocId]:
    """Sort key for result lists: score descending, then DocId ascending."""
    return (-hit.score, hit.doc)


def to_f32(x: float) -> float:
    """Round a double to the nearest single-precision value (the wire width)."""
    return _f32.unpack(_f32.pack(x))[0]


def is_ranked(hits) -> bool:
    """True iff hits are strictly ordered by `rank_key` and every score is valid."""
    prev = None
    for h in hits:
        if not (math.isfinite(h.score) and h.score >= 0):
            return False
        key = rank_key(h)
        if prev is not None and not prev < key:
            return False
        prev = key
    return True
