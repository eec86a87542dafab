"""Polyglot query routing for knowledge graphs.

Queries in a SPARQL subset are labelled by join shape, routed to one or
more backend slots by a rule policy, and translated into an aggregation
pipeline when a document store is among the targets.  Two in-memory
engines serve as default backends and as each other's oracle.
"""

from .dispatch import (
    Dispatcher,
    HttpSparqlAdapter,
    PipelineEngineAdapter,
    QueryOutcome,
    SparqlEngineAdapter,
    VerificationReport,
    reference_dispatcher,
)
from .engines import PipelineEngine, SparqlEngine, bindings_from_rows, eval_pipeline, eval_sparql
from .frontend import parse_query, print_query, tokenize
from .model import UNBOUND, Document, KnowledgeGraph, ResultSet, Term, Triple, same_results
from .ntriples import group_by_subject, load_ntriples, parse_ntriples, serialize_ntriples
from .routing import RoutingPolicy, default_policy, load_policy, select_backends
from .shape import QueryLabel, Shape, label_query
from .translate import MqlPipeline, build_operator_graph, translate, translate_expression, translate_query

__version__ = "0.1.0"

__all__ = [
    "Dispatcher", "Document", "HttpSparqlAdapter", "KnowledgeGraph", "MqlPipeline",
    "PipelineEngine", "PipelineEngineAdapter", "QueryLabel", "QueryOutcome", "ResultSet",
    "RoutingPolicy", "Shape", "SparqlEngine", "SparqlEngineAdapter", "Term", "Triple", "UNBOUND",
    "VerificationReport", "bindings_from_rows", "build_operator_graph", "default_policy",
    "eval_pipeline", "eval_sparql", "group_by_subject", "label_query", "load_ntriples",
    "load_policy", "parse_ntriples", "parse_query", "print_query", "reference_dispatcher",
    "same_results", "select_backends", "serialize_ntriples", "tokenize", "translate",
    "translate_expression", "translate_query",
]
