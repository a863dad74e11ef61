import struct

import pytest

from mose.errors import BadMagicError, BadVersionError, CorruptIndexError, TruncatedIndexError
from mose.index import build_subindex, read_subindex, write_subindex
from mose.index.storage import HEADER_SIZE, load_subindex


def test_write_read_roundtrip(tmp_path, small_index):
    path = tmp_path / "idx"
    write_subindex(small_index, path)
    back = read_subindex(path)
    assert back == small_index
    assert back.to_bytes() == path.read_bytes()


def test_header_layout(tiny_docs):
    data = build_subindex(tiny_docs, partition_id=3).to_bytes()
    magic, version, part, n, terms = struct.unpack_from("<4sIHQQ", data)
    assert (magic, version, part, n, terms) == (b"MOSE", 1, 3, 2, 3)
    sections = struct.unpack_from("<6Q", data, 26)
    assert sections[0] == HEADER_SIZE
    assert sections[0] + sections[1] == sections[2]
    assert sections[4] + sections[5] == len(data)


def test_cached_reader_matches_mapped(tmp_path, small_index):
    path = tmp_path / "idx"
    write_subindex(small_index, path)
    cached = read_subindex(path, cache_bytes=2048)
    for term in small_index.lexicon.terms()[:200]:
        assert cached.postings_of(term) == small_index.postings_of(term)
    assert cached.postings.cached <= 2048
    assert cached.postings.misses > 0


def test_bad_magic(tmp_path, tiny_docs):
    data = bytearray(build_subindex(tiny_docs).to_bytes())
    data[0] ^= 0xFF
    path = tmp_path / "idx"
    path.write_bytes(bytes(data))
    with pytest.raises(BadMagicError):
        read_subindex(path)


def test_bad_version(tiny_docs):
    data = bytearray(build_subindex(tiny_docs).to_bytes())
    data[4] = 9
    with pytest.raises(BadVersionError):
        load_subindex(bytes(data))


@pytest.mark.parametrize("cut", [3, 10, HEADER_SIZE - 1, HEADER_SIZE + 5, -1])
def test_truncation(tiny_docs, cut):
    data = build_subindex(tiny_docs).to_bytes()
    with pytest.raises(CorruptIndexError):
        load_subindex(data[:cut])


def test_truncation_error_kinds_are_distinct(tiny_docs):
    data = build_subindex(tiny_docs).to_bytes()
    with pytest.raises(TruncatedIndexError):
        load_subindex(data[:-1])
    assert not issubclass(TruncatedIndexError, BadMagicError)


def test_compressed_postings_beat_fixed_width(small_index):
    total = sum(info.df for _, info in small_index.lexicon.items())
    assert len(small_index.postings) < 4 * total
