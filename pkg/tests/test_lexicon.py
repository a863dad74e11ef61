import pytest
from hypothesis import given, strategies as st

from mose.errors import LexiconOrderError
from mose.index.lexicon import Lexicon, TermInfo, front_code, lexicon_lookup

term_sets = st.sets(st.text(min_size=1, max_size=12), max_size=120)


def sorted_bytes_order(terms):
    return sorted(terms, key=lambda t: t.encode("utf-8"))


def test_shared_prefix_example():
    lex = front_code(["search", "searching", "seed"], 16)
    (block,) = lex.blocks
    assert block.head_term == b"search"
    assert [(e.lcp_len, e.suffix) for e in block.entries] == [(0, b"search"), (6, b"ing"), (2, b"ed")]


def test_single_term():
    lex = front_code(["only"])
    assert len(lex.blocks) == 1
    assert lex.blocks[0].head_term == b"only"


def test_block_heads_stored_whole():
    terms = [f"t{i:03d}" for i in range(40)]
    lex = front_code(terms, block_size=16)
    assert [b.head_term for b in lex.blocks] == [b"t000", b"t016", b"t032"]
    assert all(b.entries[0].lcp_len == 0 for b in lex.blocks)


@pytest.mark.parametrize("terms", [["b", "a"], ["a", "a"]])
def test_unsorted_or_duplicate_input(terms):
    with pytest.raises(LexiconOrderError):
        front_code(terms)


def test_lookup_misses():
    lex = front_code(["apple", "banana", "cherry"], 2, [TermInfo(i + 1, i, 1) for i in range(3)])
    assert lexicon_lookup(lex, "") is None
    assert lexicon_lookup(lex, "zzz") is None
    assert lexicon_lookup(lex, "aaa") is None
    assert lexicon_lookup(lex, "bananas") is None
    assert lexicon_lookup(lex, "cherry") == TermInfo(3, 2, 1)


def test_roundtrip_10k_sorted_terms():
    import random

    rng = random.Random(3)
    terms = sorted_bytes_order({"".join(rng.choices("abcde", k=rng.randint(1, 9))) for _ in range(12000)})
    lex = front_code(terms, 16)
    assert lex.terms() == terms
    assert Lexicon.from_bytes(lex.to_bytes(), len(terms)) == lex


@given(term_sets, st.integers(1, 20))
def test_roundtrip_and_lookup_against_plain_map(terms, block_size):
    terms = sorted_bytes_order(terms)
    infos = [TermInfo(i + 1, 10 * i, i) for i in range(len(terms))]
    lex = front_code(terms, block_size, infos)
    assert lex.terms() == terms
    oracle = dict(zip(terms, infos))
    for t in terms:
        assert lexicon_lookup(lex, t) == oracle[t]
        assert lexicon_lookup(lex, t + "\x00") is None
    decoded = [t for t, _ in lex.items()]
    assert all(a < b for a, b in zip(decoded, decoded[1:]))


@given(term_sets, st.text(max_size=12))
def test_lookup_finds_only_indexed_terms(terms, probe):
    terms = sorted_bytes_order(terms)
    lex = front_code(terms, 4, [TermInfo(1, 0, 0)] * len(terms))
    assert (lexicon_lookup(lex, probe) is not None) == (probe in set(terms))
