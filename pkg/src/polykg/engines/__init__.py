"""In-memory reference executors used as oracles and default backends."""

from .pipeline import PipelineEngine, bindings_from_rows, document_row, eval_pipeline, resolve
from .sparql import SparqlEngine, eval_filter, eval_sparql, hash_join, left_join, match_pattern

__all__ = [
    "PipelineEngine", "SparqlEngine", "bindings_from_rows", "document_row", "eval_filter",
    "eval_pipeline", "eval_sparql", "hash_join", "left_join", "match_pattern", "resolve",
]
