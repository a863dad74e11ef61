"""The front-end query queue shared by the brokers of one Query Analyzer."""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from mose.errors import QueueClosed

Reply = Callable[[tuple, bool], object]  # (hits, error) -> delivered?


@dataclass
class PendingQuery:
    query_id: int
    text: str
    l: int
    arrival_time: float
    reply: Optional[Reply] = field(default=None, repr=False, compare=False)


class QueryQueue:
    """FIFO with exactly-once hand-off; idle brokers block in `get`.

    After `close`, already queued queries are still handed out and only an
    empty closed queue raises QueueClosed.
    """

    def __init__(self):
        self._items: deque[PendingQuery] = deque()
        self._cond = threading.Condition()
        self._closed = False

    def put(self, q: PendingQuery) -> None:
        with self._cond:
            if self._closed:
                raise QueueClosed("queue is closed")
            self._items.append(q)
            self._cond.notify()

    def get(self, timeout: float | None = None) -> PendingQuery:
        with self._cond:
            if not self._cond.wait_for(lambda: self._items or self._closed, timeout):
                raise TimeoutError("no query within timeout")
            if self._items:
                return self._items.popleft()
            raise QueueClosed("queue closed and drained")

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    @property
    def closed(self) -> bool:
        return self._closed

    def __len__(self) -> int:
        with self._cond:
            return len(self._items)


def next_query(queue: QueryQueue) -> PendingQuery:
    """Claim the first available query, blocking while the queue is empty."""
    return queue.get()
