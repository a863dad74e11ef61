"""Desk-scale parallel and distributed web search engine.

Document-partitioned compressed inverted indexes, Local Searchers answering
ranked boolean queries over one partition each, and Query Brokers that
self-schedule queries, broadcast them, and merge the partial top-l lists.
"""

__version__ = "0.1.0"
