"""The Local Searcher network service."""

from __future__ import annotations

import logging

from mose.errors import MoseError
from mose.index.storage import SubIndex
from mose.net import Connection, FrameServer
from mose.searcher.engine import search
from mose.searcher.query import parse_query
from mose.wire import Hits, Message, Query, Shutdown

log = logging.getLogger(__name__)


def answer(idx: SubIndex, q: Query, default_l: int = 10) -> Hits:
    """HITS reply for one QUERY; l=0 asks for the searcher's default."""
    try:
        ast = parse_query(q.text)
        hits = search(idx, ast, q.l or default_l)
    except MoseError as e:
        log.info("query %d failed: %s", q.query_id, e)
        return Hits(q.query_id, (), error=True)
    return Hits(q.query_id, tuple(hits))


class SearcherServer(FrameServer):
    """Answers QUERY frames against one loaded SubIndex.

    Every connection gets its own thread; all of them share the index.
    """

    def __init__(self, idx: SubIndex, endpoint: str, default_l: int = 10):
        super().__init__(endpoint)
        self.idx = idx
        self.default_l = default_l

    def on_message(self, conn: Connection, msg: Message) -> bool:
        if isinstance(msg, Query):
            return conn.send(answer(self.idx, msg, self.default_l))
        if isinstance(msg, Shutdown):
            self.request_shutdown()
            return False
        log.warning("unexpected %s from a client", type(msg).__name__)
        return False


def serve(idx: SubIndex, endpoint: str, default_l: int = 10) -> None:
    """Serve until a SHUTDOWN frame arrives."""
    server = SearcherServer(idx, endpoint, default_l)
    log.info("searcher for partition %d listening on %s", idx.partition_id, server.endpoint)
    try:
        server.serve_forever()
    finally:
        server.server_close()
