"""Topologies of n Query Analyzers, each with k brokers and p searchers.

p = 1 with n*k > 1 is task parallel, p > 1 with n = k = 1 data parallel,
p > 1 with n*k > 1 hybrid.
"""

from __future__ import annotations

import enum
import logging
import os
import socket
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from mose.errors import ConfigError, LaunchError, MalformedRecordError
from mose.index.corpus import iter_lines, parse_record
from mose.net import wait_ready
from mose.wire import Shutdown, parse_endpoint, send_message

log = logging.getLogger(__name__)


class Strategy(enum.Enum):
    SEQUENTIAL = "sequential"
    TASK_PARALLEL = "task-parallel"
    DATA_PARALLEL = "data-parallel"
    HYBRID = "hybrid"


@dataclass
class ClusterConfig:
    n: int
    k: int
    p: int
    l: int
    qa_endpoints: list[str]
    searcher_endpoints: list[list[str]]  # [qa][partition]
    index_paths: list[str]
    timeout_ms: int = 5000
    cache_bytes: int | None = None  # per-searcher postings cache; None maps the whole file

    def __post_init__(self):
        for name in ("n", "k", "p", "l"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if len(self.qa_endpoints) != self.n:
            raise ConfigError(f"{len(self.qa_endpoints)} QA endpoints for n={self.n}")
        if len(self.searcher_endpoints) != self.n or any(
            len(row) != self.p for row in self.searcher_endpoints
        ):
            raise ConfigError(f"searcher endpoints must form an {self.n} x {self.p} grid")
        if len(self.index_paths) != self.p:
            raise ConfigError(f"{len(self.index_paths)} index paths for p={self.p}")
        for ep in [*self.qa_endpoints, *(e for row in self.searcher_endpoints for e in row)]:
            try:
                parse_endpoint(ep)
            except ValueError as e:
                raise ConfigError(str(e)) from None
        if self.timeout_ms < 1:
            raise ConfigError("timeout_ms must be >= 1")

    @property
    def label(self) -> str:
        return f"n={self.n},k={self.k},p={self.p}"

    @classmethod
    def local(cls, n: int, k: int, p: int, l: int, index_paths, host: str = "127.0.0.1",
              **kw) -> ClusterConfig:
        """Config on this host with free ports picked by the OS."""
        eps = free_endpoints(n + n * p, host)
        qas, rest = eps[:n], eps[n:]
        grid = [rest[i * p:(i + 1) * p] for i in range(n)]
        return cls(n, k, p, l, qas, grid, [os.fspath(x) for x in index_paths], **kw)

    def to_text(self) -> str:
        lines = [f"n={self.n}", f"k={self.k}", f"p={self.p}", f"l={self.l}",
                 f"timeout_ms={self.timeout_ms}"]
        if self.cache_bytes is not None:
            lines.append(f"cache_bytes={self.cache_bytes}")
        lines += [f"qa.{i}={ep}" for i, ep in enumerate(self.qa_endpoints)]
        lines += [f"searcher.{i}.{j}={ep}" for i, row in enumerate(self.searcher_endpoints)
                  for j, ep in enumerate(row)]
        lines += [f"index.{j}={path}" for j, path in enumerate(self.index_paths)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> ClusterConfig:
        scalars: dict[str, int] = {}
        qas: dict[int, str] = {}
        searchers: dict[tuple[int, int], str] = {}
        indexes: dict[int, str] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, eq, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not eq:
                raise ConfigError(f"line {lineno}: expected key=value")
            parts = key.split(".")
            try:
                if key in ("n", "k", "p", "l", "timeout_ms", "cache_bytes"):
                    scalars[key] = int(value)
                elif parts[0] == "qa" and len(parts) == 2:
                    qas[int(parts[1])] = value
                elif parts[0] == "searcher" and len(parts) == 3:
                    searchers[int(parts[1]), int(parts[2])] = value
                elif parts[0] == "index" and len(parts) == 2:
                    indexes[int(parts[1])] = value
                else:
                    raise ConfigError(f"line {lineno}: unknown key {key!r}")
            except ConfigError:
                raise
            except ValueError:
                raise ConfigError(f"line {lineno}: bad value in {line!r}") from None
        missing = [x for x in ("n", "k", "p", "l") if x not in scalars]
        if missing:
            raise ConfigError(f"missing keys: {', '.join(missing)}")
        n, p = scalars["n"], scalars["p"]

        def dense(d, keys, what):
            try:
                return [d[key] for key in keys]
            except KeyError as e:
                raise ConfigError(f"missing {what} {e.args[0]}") from None

        if set(qas) - set(range(n)) or set(indexes) - set(range(p)) or \
                set(searchers) - {(i, j) for i in range(n) for j in range(p)}:
            raise ConfigError("endpoint or index number out of range")
        grid = [dense(searchers, [(i, j) for j in range(p)], "searcher") for i in range(n)]
        return cls(n, scalars["k"], p, scalars["l"], dense(qas, range(n), "qa"), grid,
                   dense(indexes, range(p), "index"), scalars.get("timeout_ms", 5000),
                   scalars.get("cache_bytes"))

    @classmethod
    def load(cls, path) -> ClusterConfig:
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")


def strategy_of(config) -> Strategy:
    n, k, p = config.n, config.k, config.p
    if p == 1:
        return Strategy.TASK_PARALLEL if n > 1 or k > 1 else Strategy.SEQUENTIAL
    return Strategy.HYBRID if n > 1 or k > 1 else Strategy.DATA_PARALLEL


def free_endpoints(count: int, host: str = "127.0.0.1") -> list[str]:
    socks = []
    try:
        for _ in range(count):
            s = socket.socket()
            s.bind((host, 0))
            socks.append(s)
        return [f"{host}:{s.getsockname()[1]}" for s in socks]
    finally:
        for s in socks:
            s.close()


# partitioning

@dataclass(frozen=True)
class PartitionPlan:
    """Record i (counting valid records only) goes to partition i mod p."""

    p: int

    def assign(self, i: int) -> int:
        return i % self.p

    def sizes(self, total: int) -> list[int]:
        return [total // self.p + (1 if j < total % self.p else 0) for j in range(self.p)]

    def global_ordinal(self, partition: int, local: int) -> int:
        return local * self.p + partition


@dataclass
class Partitioning:
    paths: list[Path]
    sizes: list[int]
    skipped: int = 0


def partition_path(out_dir, j: int) -> Path:
    return Path(out_dir) / f"part{j}"


def partition_corpus(corpus_path, p: int, out_dir) -> Partitioning:
    """Round-robin the valid records of a corpus into p files, copying lines verbatim."""
    if p < 1:
        raise ValueError("p must be >= 1")
    plan = PartitionPlan(p)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [partition_path(out_dir, j) for j in range(p)]
    files = [open(path, "wb") for path in paths]
    sizes = [0] * p
    skipped = 0
    i = 0
    try:
        for _, line in iter_lines(corpus_path):
            try:
                parse_record(line)
            except MalformedRecordError:
                skipped += 1
                continue
            j = plan.assign(i)
            files[j].write(line if line.endswith(b"\n") else line + b"\n")
            sizes[j] += 1
            i += 1
    finally:
        for f in files:
            f.close()
    return Partitioning(paths, sizes, skipped)


# launching

def _mose_cmd(*args: str) -> list[str]:
    return [sys.executable, "-m", "mose", *args]


def _child_env() -> dict:
    env = dict(os.environ)
    src = str(Path(__file__).resolve().parent.parent)
    env["PYTHONPATH"] = src + (os.pathsep + env["PYTHONPATH"] if env.get("PYTHONPATH") else "")
    return env


@dataclass
class _Proc:
    role: str
    endpoint: str
    popen: subprocess.Popen
    log: object = field(repr=False)

    def tail(self) -> str:
        try:
            self.log.seek(0)
            return self.log.read().decode("utf-8", "replace")[-2000:]
        except (OSError, ValueError):
            return ""


class Topology:
    """Handle on a launched (n, k, p) topology of local processes."""

    def __init__(self, config: ClusterConfig):
        self.config = config
        self.searchers: list[_Proc] = []
        self.qas: list[_Proc] = []

    @property
    def qa_endpoints(self) -> list[str]:
        return list(self.config.qa_endpoints)

    def _spawn(self, role: str, endpoint: str, args: list[str]) -> _Proc:
        logf = tempfile.TemporaryFile()
        popen = subprocess.Popen(_mose_cmd(*args), stdout=subprocess.DEVNULL, stderr=logf,
                                 env=_child_env())
        return _Proc(role, endpoint, popen, logf)

    def _await(self, procs: list[_Proc], timeout: float) -> None:
        for proc in procs:
            if not wait_ready(proc.endpoint, timeout, alive=lambda: proc.popen.poll() is None):
                raise LaunchError(f"{proc.role} on {proc.endpoint} did not come up:\n{proc.tail()}")

    def start(self, timeout: float = 20.0) -> Topology:
        cfg = self.config
        for path in cfg.index_paths:
            if not Path(path).is_file():
                raise LaunchError(f"missing index {path}")
        try:
            for i in range(cfg.n):
                for j in range(cfg.p):
                    ep = cfg.searcher_endpoints[i][j]
                    args = ["ls", "--index", cfg.index_paths[j], "--listen", ep, "--l", str(cfg.l)]
                    if cfg.cache_bytes is not None:
                        args += ["--cache-bytes", str(cfg.cache_bytes)]
                    self.searchers.append(self._spawn(f"searcher {i}.{j}", ep, args))
            self._await(self.searchers, timeout)
            for i in range(cfg.n):
                args = ["qb", "--listen", cfg.qa_endpoints[i],
                        "--searchers", ",".join(cfg.searcher_endpoints[i]),
                        "--k", str(cfg.k), "--l", str(cfg.l), "--timeout-ms", str(cfg.timeout_ms)]
                self.qas.append(self._spawn(f"qa {i}", cfg.qa_endpoints[i], args))
            self._await(self.qas, timeout)
        except BaseException:
            self.kill()
            raise
        return self

    @staticmethod
    def _send_shutdown(endpoint: str) -> None:
        try:
            with socket.create_connection(parse_endpoint(endpoint), timeout=2.0) as sock:
                send_message(sock, Shutdown())
        except OSError:
            pass

    @staticmethod
    def _wait(procs: list[_Proc], timeout: float) -> bool:
        deadline = time.monotonic() + timeout
        clean = True
        for proc in procs:
            try:
                proc.popen.wait(max(0.0, deadline - time.monotonic()))
            except subprocess.TimeoutExpired:
                proc.popen.kill()
                proc.popen.wait()
                clean = False
        return clean

    def shutdown(self, timeout: float = 30.0) -> bool:
        """SHUTDOWN the QAs (which drain their queues) and then the searchers."""
        for proc in self.qas:
            self._send_shutdown(proc.endpoint)
        clean = self._wait(self.qas, timeout)
        for proc in self.searchers:
            self._send_shutdown(proc.endpoint)
        clean = self._wait(self.searchers, timeout) and clean
        self._close_logs()
        return clean

    def kill(self) -> None:
        for proc in [*self.qas, *self.searchers]:
            if proc.popen.poll() is None:
                proc.popen.kill()
            proc.popen.wait()
        self._close_logs()

    def _close_logs(self) -> None:
        for proc in [*self.qas, *self.searchers]:
            proc.log.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        if any(proc.popen.poll() is None for proc in [*self.qas, *self.searchers]):
            self.shutdown()


def launch(config: ClusterConfig, timeout: float = 20.0) -> Topology:
    """Start every searcher, then every QA; abort and clean up if any fails."""
    return Topology(config).start(timeout)
