"""Query graphs and join-shape labelling.

A query is viewed as a directed graph: subjects and objects are nodes, each
triple pattern is an edge labelled by its predicate.  Equal variables share
a node, equal constant subjects share a node, and every constant object gets
a node of its own.  The label comes from a breadth-first walk out of the
source nodes (in-degree 0):

* one edge in total                         -> single triple pattern
* one source, every edge leaves the source  -> subject-subject (star)
* one source, one node per BFS level, each
  with a single outgoing edge until a final
  node with none                            -> subject-object (chain)
* anything else                             -> tree-like
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import NoSource, UnlabelableQuery
from .frontend.ast import QueryAst, TriplePattern
from .model import Term


class Shape(str, enum.Enum):
    SINGLE = "single-triple-pattern"
    SUBJECT_SUBJECT = "subject-subject"
    SUBJECT_OBJECT = "subject-object"
    TREE = "tree-like"


@dataclass(frozen=True)
class Node:
    term: Term
    slot: Optional[int] = None  # pattern index, set only for constant objects

    def __str__(self) -> str:
        return self.term.render() if self.slot is None else f"{self.term.render()}#{self.slot}"

    def __repr__(self) -> str:
        return f"Node({self})"


@dataclass(frozen=True)
class Edge:
    source: Node
    predicate: Term
    target: Node
    index: int


@dataclass
class QueryGraph:
    nodes: list[Node]
    edges: list[Edge]
    patterns: list[TriplePattern]

    def out_edges(self, node: Node) -> list[Edge]:
        return [e for e in self.edges if e.source == node]

    def in_edges(self, node: Node) -> list[Edge]:
        return [e for e in self.edges if e.target == node]

    def out_degree(self, node: Node) -> int:
        return sum(1 for e in self.edges if e.source == node)

    def in_degree(self, node: Node) -> int:
        return sum(1 for e in self.edges if e.target == node)


def _subject_node(p: TriplePattern) -> Node:
    return Node(p.subject)


def _object_node(p: TriplePattern, index: int) -> Node:
    return Node(p.object) if p.object.is_variable else Node(p.object, index)


def build_query_graph(ast_or_patterns) -> QueryGraph:
    """Graph over required and optional patterns (required first)."""
    if isinstance(ast_or_patterns, QueryAst):
        patterns = ast_or_patterns.all_patterns()
    else:
        patterns = list(ast_or_patterns)
    nodes: dict[Node, None] = {}
    edges = []
    for i, p in enumerate(patterns):
        s, o = _subject_node(p), _object_node(p, i)
        nodes.setdefault(s, None)
        nodes.setdefault(o, None)
        edges.append(Edge(s, p.predicate, o, i))
    return QueryGraph(list(nodes), edges, patterns)


def find_source_nodes(g: QueryGraph) -> list[Node]:
    has_in = {e.target for e in g.edges}
    has_out = {e.source for e in g.edges}
    sources = [n for n in g.nodes if n not in has_in and n in has_out]
    if not sources:
        raise NoSource("every node has an incoming edge")
    return sources


def has_cycle(g: QueryGraph) -> bool:
    indeg = {n: 0 for n in g.nodes}
    for e in g.edges:
        indeg[e.target] += 1
    ready = [n for n, d in indeg.items() if d == 0]
    removed = 0
    while ready:
        n = ready.pop()
        removed += 1
        for e in g.out_edges(n):
            indeg[e.target] -= 1
            if indeg[e.target] == 0:
                ready.append(e.target)
    return removed != len(g.nodes)


def bfs_levels(g: QueryGraph, sources: Iterable[Node]) -> list[list[Node]]:
    """Nodes grouped by BFS distance from the nearest source."""
    depth: dict[Node, int] = {}
    queue: deque[Node] = deque()
    for s in sources:
        depth[s] = 0
        queue.append(s)
    while queue:
        node = queue.popleft()
        for e in g.out_edges(node):
            if e.target not in depth:
                depth[e.target] = depth[node] + 1
                queue.append(e.target)
    levels: list[list[Node]] = []
    for node, d in depth.items():
        while len(levels) <= d:
            levels.append([])
        levels[d].append(node)
    return levels


@dataclass(frozen=True)
class QueryLabel:
    shape: Shape
    has_modifiers: bool = False
    has_optional: bool = False
    has_filter: bool = False
    source_nodes: tuple[Node, ...] = ()

    def describe(self) -> str:
        flags = ", ".join(
            name for name, on in (
                ("modifiers", self.has_modifiers),
                ("optional", self.has_optional),
                ("filter", self.has_filter),
            ) if on
        )
        return f"{self.shape.value}" + (f" [{flags}]" if flags else "")


def shape_of(g: QueryGraph) -> tuple[Shape, list[Node]]:
    if has_cycle(g):
        raise UnlabelableQuery("cyclic query graph")
    try:
        sources = find_source_nodes(g)
    except NoSource as exc:
        raise UnlabelableQuery(str(exc)) from exc
    if len(g.edges) == 1:
        return Shape.SINGLE, sources
    if len(sources) != 1:
        return Shape.TREE, sources
    levels = bfs_levels(g, sources)
    if len(levels) == 2 and all(g.out_degree(n) == 0 for n in levels[1]):
        return Shape.SUBJECT_SUBJECT, sources
    chain = all(len(level) == 1 for level in levels)
    chain = chain and all(g.out_degree(level[0]) == 1 for level in levels[:-1])
    chain = chain and g.out_degree(levels[-1][0]) == 0
    if chain and len(levels) == len(g.edges) + 1:
        return Shape.SUBJECT_OBJECT, sources
    return Shape.TREE, sources


def label_query(ast: QueryAst) -> QueryLabel:
    shape, sources = shape_of(build_query_graph(ast))
    return QueryLabel(
        shape=shape,
        has_modifiers=ast.modifiers.any,
        has_optional=bool(ast.optional_blocks),
        has_filter=ast.filter is not None,
        source_nodes=tuple(sources),
    )
