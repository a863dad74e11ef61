"""Client side of a Query Analyzer (or a single searcher)."""

from __future__ import annotations

import itertools

from mose.errors import ProtocolError, QueryFailed
from mose.model import ScoredHit
from mose.net import connect
from mose.wire import Hits, Query, Shutdown, recv_message, send_message


class QueryClient:
    """Synchronous client: one outstanding query at a time per instance."""

    def __init__(self, endpoint: str, timeout: float | None = 30.0):
        self.endpoint = endpoint
        self.sock = connect(endpoint, timeout=timeout)
        self.sock.settimeout(timeout)
        self._ids = itertools.count(1)

    def query(self, text: str, l: int = 10) -> list[ScoredHit]:
        """Ranked hits; raises QueryFailed on an error-flagged reply."""
        reply = self.ask(text, l)
        if reply.error:
            raise QueryFailed(f"query {text!r} failed")
        return list(reply.hits)

    def ask(self, text: str, l: int = 10) -> Hits:
        qid = next(self._ids)
        send_message(self.sock, Query(qid, l, text))
        while True:
            msg = recv_message(self.sock)
            if msg is None:
                raise ProtocolError("server closed the connection")
            if isinstance(msg, Hits) and msg.query_id == qid:
                return msg

    def shutdown_server(self) -> None:
        send_message(self.sock, Shutdown())

    def close(self) -> None:
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
