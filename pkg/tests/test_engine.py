import math
import random

import pytest
from hypothesis import given, strategies as st

from oracles import brute_eval, brute_index, brute_top

from mose.bench import synth_query_log, synth_records
from mose.errors import InvariantViolation
from mose.index import build_subindex
from mose.model import DocId, is_ranked
from mose.searcher.engine import (
    ScoredList,
    difference,
    evaluate,
    fetch_scored_list,
    intersect,
    postorder,
    search,
    top_l,
    union,
)
from mose.searcher.query import And, Term, parse_query

A = ScoredList([1, 3, 5], [1.0, 2.0, 1.0])
B = ScoredList([3, 4, 5], [1.0, 1.0, 2.0])


def test_and_example():
    assert intersect(A, B).entries() == [(3, 3.0), (5, 3.0)]


def test_or_with_empty_is_identity():
    assert union(ScoredList(), A) == A
    assert union(A, ScoredList()) == A


def test_or_adds_scores():
    assert union(A, B).entries() == [(1, 1.0), (3, 3.0), (4, 1.0), (5, 3.0)]


def test_andnot_keeps_left_scores():
    assert difference(A, B).entries() == [(1, 1.0)]


def test_fetch(tiny_docs):
    idx = build_subindex(tiny_docs)
    assert fetch_scored_list(idx, "c").entries() == [(1, 1.0)]
    assert fetch_scored_list(idx, "a").entries() == [(0, 1.0 + math.log(2))]
    assert fetch_scored_list(idx, "nope").entries() == []


def test_postorder_puts_operands_first():
    ast = parse_query("(a OR b) ANDNOT c")
    kinds = [type(n).__name__ for n in postorder(ast)]
    assert kinds == ["Term", "Term", "Or", "Term", "AndNot"]


def test_stack_guard(monkeypatch, tiny_docs):
    import mose.searcher.engine as engine

    monkeypatch.setattr(engine, "postorder", lambda ast: [Term("a"), Term("b")])
    with pytest.raises(InvariantViolation):
        evaluate(Term("a"), build_subindex(tiny_docs))
    monkeypatch.setattr(engine, "postorder", lambda ast: [And(Term("a"), Term("b"))])
    with pytest.raises(InvariantViolation):
        evaluate(Term("a"), build_subindex(tiny_docs))


def test_top_l_example():
    lst = ScoredList([1, 2, 3], [0.5, 3.0, 1.0])
    assert top_l(lst, 2) == [(2, 3.0), (3, 1.0)]


def test_top_l_tie_rule():
    lst = ScoredList([4, 7, 9, 12, 20], [1.0] * 5)
    assert top_l(lst, 3) == [(4, 1.0), (7, 1.0), (9, 1.0)]


def test_top_l_short_list():
    assert top_l(ScoredList([1], [2.0]), 5) == [(1, 2.0)]


def test_top_l_random_lists_equal_sort_and_truncate():
    rng = random.Random(2)
    for _ in range(20):
        docs = sorted(rng.sample(range(10**6), 10**4))
        scores = [float(rng.randint(0, 50)) / 4 for _ in docs]
        l = rng.randint(1, 200)
        expect = sorted(zip(docs, scores), key=lambda x: (-x[1], x[0]))[:l]
        assert top_l(ScoredList(docs, scores), l) == expect


@given(st.lists(st.tuples(st.integers(0, 50), st.floats(0, 10, allow_nan=False)), unique_by=lambda x: x[0]),
       st.integers(1, 30))
def test_top_l_property(entries, l):
    entries.sort()
    lst = ScoredList([d for d, _ in entries], [s for _, s in entries])
    assert top_l(lst, l) == sorted(entries, key=lambda x: (-x[1], x[0]))[:l]


def test_200_random_queries_match_set_algebra():
    records = list(synth_records(1000, 4000, 1.0, seed=21, doc_len=30))
    idx = build_subindex(records)
    oracle = brute_index(r.body for r in records)
    for text in synth_query_log(200, 4000, 1.0, seed=21):
        ast = parse_query(text)
        got = evaluate(ast, idx)
        expect = brute_eval(ast, oracle)
        assert got.docs == sorted(expect)
        assert got.scores == [expect[d] for d in got.docs]
        hits = search(idx, ast, 10)
        assert [(h.doc.local, h.score) for h in hits] == brute_top(expect, 10)
        assert is_ranked(hits)


def test_search_stamps_partition(tiny_docs):
    idx = build_subindex(tiny_docs, partition_id=5)
    assert search(idx, Term("b"), 10)[0].doc == DocId(5, 0)
