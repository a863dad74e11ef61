"""Threaded TCP servers and clients speaking the frame protocol."""

from __future__ import annotations

import logging
import socket
import socketserver
import threading
import time

from mose.errors import ProtocolError
from mose.wire import Message, Ping, Pong, recv_message, send_message, parse_endpoint

log = logging.getLogger(__name__)


class Connection:
    """A socket whose writes are serialized, so several threads may reply on it."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self._lock = threading.Lock()

    def send(self, m: Message) -> bool:
        with self._lock:
            try:
                send_message(self.sock, m)
                return True
            except OSError:
                return False


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        sock = self.request
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        conn = Connection(sock)
        while True:
            try:
                msg = recv_message(sock)
            except ProtocolError as e:
                log.warning("closing connection from %s: %s", self.client_address, e)
                return
            except OSError:
                return
            if msg is None:
                return
            if isinstance(msg, Ping):
                conn.send(Pong())
                continue
            if not self.server.on_message(conn, msg):
                return


class FrameServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, endpoint: str):
        super().__init__(parse_endpoint(endpoint), _Handler)

    @property
    def endpoint(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"

    def on_message(self, conn: Connection, msg: Message) -> bool:
        """Handle one message; return False to close the connection."""
        raise NotImplementedError

    def request_shutdown(self) -> None:
        # shutdown() waits for serve_forever, so never call it on a handler's own stack
        threading.Thread(target=self.shutdown, daemon=True).start()

    def start(self) -> threading.Thread:
        t = threading.Thread(target=self.serve_forever, name=type(self).__name__, daemon=True)
        t.start()
        return t

    def stop(self) -> None:
        self.shutdown()
        self.server_close()


def connect(endpoint: str, timeout: float | None = None) -> socket.socket:
    sock = socket.create_connection(parse_endpoint(endpoint), timeout=timeout)
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    sock.settimeout(None)
    return sock


def ping(endpoint: str, timeout: float = 1.0) -> bool:
    try:
        with socket.create_connection(parse_endpoint(endpoint), timeout=timeout) as sock:
            sock.settimeout(timeout)
            send_message(sock, Ping())
            return isinstance(recv_message(sock), Pong)
    except (OSError, ProtocolError):
        return False


def wait_ready(endpoint: str, timeout: float = 10.0, alive=lambda: True) -> bool:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if ping(endpoint):
            return True
        if not alive():
            return False
        time.sleep(0.05)
    return False
