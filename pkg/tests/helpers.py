"""In-process servers for network tests."""

from __future__ import annotations

import threading
import time

from mose.net import Connection, FrameServer
from mose.wire import Hits, Query, Shutdown


class FakeSearcher(FrameServer):
    """Scripted searcher: `script(query) -> list of (delay_s, Hits)`."""

    def __init__(self, script):
        super().__init__("127.0.0.1:0")
        self.script = script
        self.received: list[Query] = []

    def on_message(self, conn: Connection, msg) -> bool:
        if isinstance(msg, Shutdown):
            self.request_shutdown()
            return False
        self.received.append(msg)

        def respond():
            for delay, hits in self.script(msg):
                time.sleep(delay)
                conn.send(hits)

        threading.Thread(target=respond, daemon=True).start()
        return True


def echo_empty(q: Query):
    return [(0, Hits(q.query_id, ()))]


def running(server):
    server.start()
    return server
