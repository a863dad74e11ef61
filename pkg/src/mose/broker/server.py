"""Query Brokers and the Query Analyzer service that hosts them."""

from __future__ import annotations

import itertools
import logging
import selectors
import socket
import threading
import time
from typing import Sequence

from mose.broker.gather import GatherState
from mose.broker.merge import globalize, merge_top_l
from mose.broker.queue import PendingQuery, QueryQueue, next_query
from mose.errors import (
    GatherTimeout,
    MoseError,
    PartialClusterError,
    ProtocolError,
    QueryFailed,
    QueueClosed,
)
from mose.model import ScoredHit
from mose.net import Connection, FrameServer, connect
from mose.wire import FrameBuffer, Hits, Message, Query, Shutdown, encode_message

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 5.0
CONNECT_RETRIES = 3


class SearcherLink:
    """One broker's connection to one Local Searcher."""

    def __init__(self, endpoint: str, retries: int = CONNECT_RETRIES):
        self.endpoint = endpoint
        self.retries = retries
        self.sock: socket.socket | None = None
        self.buffer = FrameBuffer()

    def close(self) -> None:
        if self.sock is not None:
            try:
                self.sock.close()
            except OSError:
                pass
        self.sock = None
        self.buffer = FrameBuffer()

    def _connect(self) -> None:
        delay = 0.05
        for attempt in range(self.retries):
            try:
                self.sock = connect(self.endpoint, timeout=2.0)
                return
            except OSError as e:
                log.info("connect to %s failed (%s), attempt %d", self.endpoint, e, attempt + 1)
                if attempt + 1 < self.retries:
                    time.sleep(delay)
                    delay *= 2
        raise PartialClusterError(f"searcher {self.endpoint} unreachable")

    def send(self, frame: bytes) -> None:
        """Send, reconnecting with bounded retries if the link is down or breaks."""
        for _ in range(2):
            if self.sock is None:
                self._connect()
            try:
                self.sock.sendall(frame)
                return
            except OSError:
                self.close()
        raise PartialClusterError(f"searcher {self.endpoint} unreachable")


_query_ids = itertools.count(1)


class Broker:
    """Broadcasts each query to its p searchers and merges their partial top-l lists."""

    def __init__(self, searchers: Sequence[str], l: int = 10, timeout: float = DEFAULT_TIMEOUT):
        if not searchers:
            raise ValueError("a broker needs at least one searcher")
        self.links = [SearcherLink(e) for e in searchers]
        self.l = l
        self.timeout = timeout

    @property
    def p(self) -> int:
        return len(self.links)

    def broadcast(self, q: PendingQuery) -> None:
        """Send the same QUERY frame to every searcher without waiting for replies."""
        frame = encode_message(Query(q.query_id, q.l or self.l, q.text))
        for link in self.links:
            link.send(frame)

    def gather(self, state: GatherState) -> list[Hits]:
        """Collect replies in whatever order they arrive until all p are in."""
        deadline = time.monotonic() + self.timeout
        with selectors.DefaultSelector() as sel:
            for slot, link in enumerate(self.links):
                sel.register(link.sock, selectors.EVENT_READ, slot)
            while not state.complete:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise GatherTimeout(f"query {state.query_id}: {state.received}/{state.expected} replies")
                for key, _ in sel.select(remaining):
                    slot = key.data
                    link = self.links[slot]
                    try:
                        data = link.sock.recv(1 << 16)
                    except OSError:
                        data = b""
                    if not data:
                        sel.unregister(link.sock)
                        link.close()
                        raise PartialClusterError(f"searcher {link.endpoint} closed the connection")
                    try:
                        messages = link.buffer.feed(data)
                    except ProtocolError:
                        sel.unregister(link.sock)
                        link.close()
                        raise
                    for msg in messages:
                        # replies to earlier, timed-out queries are dropped
                        if isinstance(msg, Hits) and msg.query_id == state.query_id:
                            state.add(slot, msg)
        return state.results()

    def process(self, q: PendingQuery) -> list[ScoredHit]:
        state = GatherState(q.query_id, self.p)
        self.broadcast(q)
        replies = self.gather(state)
        if any(r.error for r in replies):
            raise QueryFailed(f"query {q.query_id} rejected by a searcher")
        partials = [globalize(r.hits, self.p) for r in replies]
        return merge_top_l(partials, q.l or self.l)

    def handle(self, q: PendingQuery) -> bool:
        """Answer one query on its reply path; errors become error replies."""
        try:
            hits = self.process(q)
            error = False
        except MoseError as e:
            log.info("query %d failed: %s", q.query_id, e)
            hits, error = [], True
        except Exception:
            log.exception("query %d crashed the broker step", q.query_id)
            hits, error = [], True
        if q.reply is not None:
            q.reply(tuple(hits), error)
        return not error

    def close(self) -> None:
        for link in self.links:
            link.close()


def run_broker(broker: Broker, queue: QueryQueue) -> int:
    """The broker loop: claim, broadcast, gather, merge, reply; until the queue closes."""
    served = 0
    try:
        while True:
            try:
                q = next_query(queue)
            except QueueClosed:
                return served
            broker.handle(q)
            served += 1
    finally:
        broker.close()


class QueryAnalyzer(FrameServer):
    """k brokers sharing one inbound queue fed by a TCP acceptor.

    Replies go back on the connection that submitted the query, under the
    client's own query_id.  SHUTDOWN stops intake, drains the queue and exits.
    """

    def __init__(self, endpoint: str, searchers: Sequence[str], k: int = 1, l: int = 10,
                 timeout: float = DEFAULT_TIMEOUT):
        super().__init__(endpoint)
        if k < 1:
            raise ValueError("k must be >= 1")
        self.queue = QueryQueue()
        self.brokers = [Broker(searchers, l, timeout) for _ in range(k)]
        self._broker_threads: list[threading.Thread] = []
        self._draining = threading.Event()
        self.drained = threading.Event()

    def start_brokers(self) -> None:
        for i, b in enumerate(self.brokers):
            t = threading.Thread(target=run_broker, args=(b, self.queue), name=f"broker-{i}", daemon=True)
            t.start()
            self._broker_threads.append(t)

    def submit(self, conn: Connection, msg: Query) -> None:
        def reply(hits: tuple, error: bool, _conn=conn, _qid=msg.query_id):
            return _conn.send(Hits(_qid, hits, error))

        q = PendingQuery(next(_query_ids), msg.text, msg.l, time.monotonic(), reply)
        try:
            self.queue.put(q)
        except QueueClosed:
            reply((), True)

    def on_message(self, conn: Connection, msg: Message) -> bool:
        if isinstance(msg, Query):
            self.submit(conn, msg)
            return True
        if isinstance(msg, Shutdown):
            self.drain_and_stop()
            return True
        log.warning("unexpected %s from a client", type(msg).__name__)
        return False

    def drain_and_stop(self) -> None:
        if self._draining.is_set():
            return
        self._draining.set()

        def drain():
            self.queue.close()
            for t in self._broker_threads:
                t.join()
            self.drained.set()
            self.shutdown()

        threading.Thread(target=drain, name="drain", daemon=True).start()


def serve_qa(endpoint: str, searchers: Sequence[str], k: int = 1, l: int = 10,
             timeout: float = DEFAULT_TIMEOUT) -> None:
    qa = QueryAnalyzer(endpoint, searchers, k, l, timeout)
    qa.start_brokers()
    log.info("query analyzer on %s: k=%d, p=%d", qa.endpoint, k, len(searchers))
    try:
        qa.serve_forever()
    finally:
        qa.server_close()
