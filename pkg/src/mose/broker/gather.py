from __future__ import annotations

from mose.errors import ProtocolError
from mose.wire import Hits


class GatherState:
    """Partial results of one query, indexed by searcher slot, in arrival order."""

    def __init__(self, query_id: int, expected: int):
        if expected < 1:
            raise ValueError("expected must be >= 1")
        self.query_id = query_id
        self.expected = expected
        self.partials: dict[int, Hits] = {}

    @property
    def received(self) -> int:
        return len(self.partials)

    @property
    def complete(self) -> bool:
        return self.received == self.expected

    def add(self, slot: int, hits: Hits) -> bool:
        """Record one searcher's reply; returns True once all have arrived."""
        if hits.query_id != self.query_id:
            raise ProtocolError(f"reply for query {hits.query_id} routed to {self.query_id}")
        if not 0 <= slot < self.expected:
            raise ProtocolError(f"no searcher slot {slot}")
        if slot in self.partials:
            raise ProtocolError(f"duplicate reply for query {self.query_id} from slot {slot}")
        self.partials[slot] = hits
        return self.complete

    def results(self) -> list[Hits]:
        if not self.complete:
            raise ProtocolError(f"query {self.query_id} still waiting on "
                                f"{self.expected - self.received} searchers")
        return [self.partials[i] for i in range(self.expected)]
