from mose.broker.gather import GatherState
from mose.broker.merge import globalize, merge_top_l
from mose.broker.queue import PendingQuery, QueryQueue, next_query
from mose.broker.server import Broker, QueryAnalyzer, run_broker, serve_qa

__all__ = [
    "Broker", "GatherState", "PendingQuery", "QueryAnalyzer", "QueryQueue",
    "globalize", "merge_top_l", "next_query", "run_broker", "serve_qa",
]
