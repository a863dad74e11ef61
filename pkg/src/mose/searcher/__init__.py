from mose.searcher.engine import ScoredList, evaluate, fetch_scored_list, search, top_l
from mose.searcher.query import And, AndNot, Or, QueryAst, Term, parse_query
from mose.searcher.server import SearcherServer, answer, serve

__all__ = [
    "And", "AndNot", "Or", "QueryAst", "ScoredList", "SearcherServer", "Term",
    "answer", "evaluate", "fetch_scored_list", "parse_query", "search", "serve", "top_l",
]
