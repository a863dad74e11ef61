from __future__ import annotations

import heapq
from typing import Sequence

from mose.errors import ProtocolError
from mose.model import ScoredHit, is_ranked


def globalize(hits: Sequence[ScoredHit], parts: int) -> list[ScoredHit]:
    """Rename partition-local DocIds to monolithic ones (round-robin partitioning).

    Within a partition the rename is monotone, so ranked order is preserved.
    """
    try:
        return [ScoredHit(h.doc.to_global(parts), h.score) for h in hits]
    except ValueError as e:
        raise ProtocolError(str(e)) from None


def merge_top_l(partials: Sequence[Sequence[ScoredHit]], l: int) -> list[ScoredHit]:
    """Global top-l of p ranked lists, via a heap over the p list heads."""
    if l < 1:
        raise ValueError("l must be >= 1")
    for j, part in enumerate(partials):
        if not is_ranked(part):
            raise ProtocolError(f"partial result of partition {j} is not ranked")
    heap = [(-part[0].score, part[0].doc, j, 0) for j, part in enumerate(partials) if part]
    heapq.heapify(heap)
    out: list[ScoredHit] = []
    while heap and len(out) < l:
        neg, doc, j, i = heap[0]
        out.append(ScoredHit(doc, -neg))
        i += 1
        if i < len(partials[j]):
            nxt = partials[j][i]
            heapq.heapreplace(heap, (-nxt.score, nxt.doc, j, i))
        else:
            heapq.heappop(heap)
    if len({h.doc for h in out}) != len(out):
        raise ProtocolError("a document was reported by two partitions")
    return out
