import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mose.bench import synth_query_log, synth_records  # noqa: E402
from mose.index import DocumentRecord, build_subindex  # noqa: E402

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def acceptance_record():
    def record(name: str, ok: bool, detail: str = ""):
        _ACCEPTANCE.append((name, ok, detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def tiny_docs():
    return [DocumentRecord("u0", "a b a"), DocumentRecord("u1", "b c")]


@pytest.fixture(scope="session")
def small_corpus():
    """300 Zipf documents (records, vocab size, seed)."""
    return list(synth_records(300, 1500, 1.0, seed=7, doc_len=40)), 1500, 7


@pytest.fixture(scope="session")
def small_index(small_corpus):
    records, _, _ = small_corpus
    return build_subindex(records)


@pytest.fixture(scope="session")
def small_queries(small_corpus):
    _, vocab, seed = small_corpus
    return synth_query_log(60, vocab, 1.0, seed)
