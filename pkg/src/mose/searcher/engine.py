"""Query evaluation over one SubIndex.

A document's score is the sum over matched query terms of ``1 + ln(tf)``.
Nothing depends on collection statistics, so a document scores the same in
a partition as in the monolithic index.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

from mose.errors import InvariantViolation
from mose.index.storage import SubIndex
from mose.model import DocId, ScoredHit, to_f32
from mose.searcher.query import And, AndNot, Or, QueryAst, Term


@dataclass
class ScoredList:
    """Local doc ids, strictly increasing, with a parallel list of scores."""

    docs: list[int] = field(default_factory=list)
    scores: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.docs)

    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.docs, self.scores))


def tf_score(tf: int) -> float:
    return 1.0 + math.log(tf)


def fetch_scored_list(idx: SubIndex, term: str) -> ScoredList:
    docs, tfs = idx.postings_of(term)
    return ScoredList(docs, [1.0 + math.log(tf) for tf in tfs])


def intersect(a: ScoredList, b: ScoredList) -> ScoredList:
    out = ScoredList()
    ad, asc, bd, bsc = a.docs, a.scores, b.docs, b.scores
    i = j = 0
    na, nb = len(ad), len(bd)
    while i < na and j < nb:
        x, y = ad[i], bd[j]
        if x == y:
            out.docs.append(x)
            out.scores.append(asc[i] + bsc[j])
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return out


def union(a: ScoredList, b: ScoredList) -> ScoredList:
    out = ScoredList()
    docs, scores = out.docs, out.scores
    ad, asc, bd, bsc = a.docs, a.scores, b.docs, b.scores
    i = j = 0
    na, nb = len(ad), len(bd)
    while i < na and j < nb:
        x, y = ad[i], bd[j]
        if x == y:
            docs.append(x)
            scores.append(asc[i] + bsc[j])
            i += 1
            j += 1
        elif x < y:
            docs.append(x)
            scores.append(asc[i])
            i += 1
        else:
            docs.append(y)
            scores.append(bsc[j])
            j += 1
    docs += ad[i:]
    scores += asc[i:]
    docs += bd[j:]
    scores += bsc[j:]
    return out


def difference(a: ScoredList, b: ScoredList) -> ScoredList:
    out = ScoredList()
    bd = b.docs
    j, nb = 0, len(bd)
    for x, s in zip(a.docs, a.scores):
        while j < nb and bd[j] < x:
            j += 1
        if j < nb and bd[j] == x:
            continue
        out.docs.append(x)
        out.scores.append(s)
    return out


_COMBINE = {And: intersect, Or: union, AndNot: difference}


def postorder(ast: QueryAst) -> list[QueryAst]:
    """Nodes in postorder (left, right, node), iteratively."""
    out = []
    stack = [ast]
    while stack:
        node = stack.pop()
        out.append(node)
        if not isinstance(node, Term):
            stack.append(node.left)
            stack.append(node.right)
    out.reverse()
    return out


def evaluate(ast: QueryAst, idx: SubIndex) -> ScoredList:
    """Bottom-up evaluation: each term's list is pushed onto a stack and every
    operator consumes the two lists on top as soon as both are there."""
    stack: list[ScoredList] = []
    for node in postorder(ast):
        if isinstance(node, Term):
            stack.append(fetch_scored_list(idx, node.text))
            continue
        if len(stack) < 2:
            raise InvariantViolation("operator with fewer than two operands on the stack")
        right = stack.pop()
        left = stack.pop()
        stack.append(_COMBINE[type(node)](left, right))
    if len(stack) != 1:
        raise InvariantViolation(f"evaluation ended with {len(stack)} lists on the stack")
    return stack[0]


def top_l(lst: ScoredList, l: int) -> list[tuple[int, float]]:
    """The l best (doc, score) pairs by score descending, doc ascending.

    Heapifies the whole list in linear time and pops l entries.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    heap = [(-s, d) for d, s in zip(lst.docs, lst.scores)]
    heapq.heapify(heap)
    return [(d, -neg) for neg, d in (heapq.heappop(heap) for _ in range(min(l, len(heap))))]


def search(idx: SubIndex, ast: QueryAst, l: int) -> list[ScoredHit]:
    """Top-l hits of a parsed query, with scores rounded to wire (f32) precision
    before ranking so every downstream comparison sees the same values."""
    result = evaluate(ast, idx)
    rounded = ScoredList(result.docs, [to_f32(s) for s in result.scores])
    part = idx.partition_id
    return [ScoredHit(DocId(part, d), s) for d, s in top_l(rounded, l)]
