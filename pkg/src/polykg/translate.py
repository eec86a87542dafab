"""Just-in-time translation of SELECT queries into aggregation pipelines.

Documents hold one subject each (``subject_id`` plus predicate fields), so a
pattern chain becomes a root ``$match`` on the source subject followed by a
``$lookup``/``$match`` pair for every variable that is itself the subject of
further patterns.  Variables are addressed by dotted paths such as
``join_field.CUI``; the first place a variable appears is its canonical path,
and every later appearance becomes an ``$expr`` equality in the final match.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .errors import UnknownStage, UnsupportedExpression, UntranslatableQuery
from .frontend.ast import (
    And,
    Compare,
    Exists,
    FilterExpr,
    ModifierSet,
    Not,
    NotExists,
    Or,
    QueryAst,
    TriplePattern,
)
from .model import Term
from .shape import Node, QueryLabel, Shape, build_query_graph, label_query

ROOT_MATCH = "root-match"
LOOKUP_STEP = "lookup-step"
POST_MATCH = "post-match"

STAGE_KINDS = ("match", "lookup", "sort", "skip", "limit", "project")

_OPS = {"=": "$eq", "!=": "$ne", ">": "$gt", ">=": "$gte", "<": "$lt", "<=": "$lte"}
# a const-op-var comparison is rewritten as var-op'-const
_FLIPPED = {"=": "=", "!=": "!=", ">": "<", ">=": "<=", "<": ">", "<=": ">="}

ALIAS_BASE = "join_field"


@dataclass(frozen=True)
class ChainStep:
    pattern: TriplePattern
    role: str
    prefix: str = ""  # path prefix of the pattern's subject document ("" for the root)


@dataclass(frozen=True)
class LookupSpec:
    local_field: str
    alias: str


@dataclass
class OperatorGraph:
    projection: list[str]
    join_kind: Shape
    pattern_chain: list[ChainStep]
    conditions: Optional[FilterExpr]
    modifiers: ModifierSet
    root: Term = field(default_factory=lambda: Term.variable("root"))
    lookups: list[LookupSpec] = field(default_factory=list)
    var_paths: dict[str, list[str]] = field(default_factory=dict)

    def path_of(self, var: str) -> Optional[str]:
        paths = self.var_paths.get(var)
        return paths[0] if paths else None


@dataclass(frozen=True)
class MqlStage:
    kind: str
    body: Any

    def __post_init__(self):
        if self.kind not in STAGE_KINDS:
            raise UnknownStage(f"unknown stage ${self.kind}")

    def to_dict(self) -> dict[str, Any]:
        return {"$" + self.kind: self.body}


@dataclass(frozen=True)
class MqlPipeline:
    collection: str
    stages: tuple[MqlStage, ...]

    def __post_init__(self):
        if not self.stages or self.stages[0].kind != "match":
            raise ValueError("a pipeline must start with a $match stage")

    def to_list(self) -> list[dict[str, Any]]:
        return [s.to_dict() for s in self.stages]

    def to_text(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_list(), indent=indent, ensure_ascii=False)

    @classmethod
    def from_list(cls, stages: list[dict[str, Any]], collection: str = "kg") -> "MqlPipeline":
        parsed = []
        for raw in stages:
            if not isinstance(raw, dict) or len(raw) != 1:
                raise ValueError(f"a stage is a single-key object, got {raw!r}")
            (key, body), = raw.items()
            parsed.append(MqlStage(key.lstrip("$"), body))
        return cls(collection, tuple(parsed))

    @classmethod
    def from_text(cls, text: str, collection: Optional[str] = None) -> "MqlPipeline":
        stages = json.loads(text)
        if collection is None:
            froms = [s["$lookup"]["from"] for s in stages if isinstance(s, dict) and "$lookup" in s]
            collection = froms[0] if froms else "kg"
        return cls.from_list(stages, collection)

    def projection(self) -> list[str]:
        for stage in self.stages:
            if stage.kind == "project":
                return list(stage.body)
        return []


# -- operator graph ------------------------------------------------------------


def build_operator_graph(ast: QueryAst, label: Optional[QueryLabel] = None) -> OperatorGraph:
    if ast.optional_blocks:
        raise UntranslatableQuery("OPTIONAL blocks are not translated")
    for p in ast.patterns:
        if p.predicate.is_variable:
            raise UntranslatableQuery(f"variable predicate {p.predicate} in {p.subject} {p.predicate} {p.object}")
    label = label or label_query(ast)
    if len(label.source_nodes) != 1:
        raise UntranslatableQuery(f"query has {len(label.source_nodes)} source nodes; one root is needed")
    g = build_query_graph(ast)
    root = label.source_nodes[0]

    var_paths: dict[str, list[str]] = {}

    def note(term: Term, path: str) -> None:
        if term.is_variable:
            var_paths.setdefault(term.var_name, []).append(path)

    prefixes: dict[Node, str] = {root: ""}
    note(root.term, "subject_id")
    chain: list[ChainStep] = []
    lookups: list[LookupSpec] = []
    queue: deque[Node] = deque([root])
    while queue:
        node = queue.popleft()
        prefix = prefixes[node]
        role = ROOT_MATCH if node == root else POST_MATCH
        bridges = []
        for e in g.out_edges(node):
            pattern = g.patterns[e.index]
            path = prefix + pattern.predicate.lexical
            note(pattern.object, path)
            is_bridge = e.target.term.is_variable and g.out_degree(e.target) > 0
            if is_bridge and e.target not in prefixes:
                alias = ALIAS_BASE if not lookups else f"{ALIAS_BASE}{len(lookups) + 1}"
                lookups.append(LookupSpec(path, alias))
                prefixes[e.target] = alias + "."
                bridges.append(e.target)
                chain.append(ChainStep(pattern, LOOKUP_STEP, prefix))
            else:
                chain.append(ChainStep(pattern, role, prefix))
        queue.extend(bridges)
    return OperatorGraph(
        projection=ast.projected_variables(),
        join_kind=label.shape,
        pattern_chain=chain,
        conditions=ast.filter,
        modifiers=ast.modifiers,
        root=root.term,
        lookups=lookups,
        var_paths=var_paths,
    )


# -- expressions -----------------------------------------------------------------


def _operand(term: Term, field_of: Callable[[str], str]) -> Any:
    if term.is_variable:
        return "$" + field_of(term.var_name)
    value = term.native
    if isinstance(value, str) and value.startswith("$"):
        return {"$literal": value}
    return value


def translate_expression(e: FilterExpr, field_of: Optional[Callable[[str], str]] = None) -> dict[str, Any]:
    """Map a filter expression onto a match fragment.

    ``field_of`` maps a variable name to its document path; by default the
    variable's own name is used.
    """
    field_of = field_of or (lambda name: name)
    if isinstance(e, Exists):
        return {field_of(e.term.var_name): {"$exists": True}}
    if isinstance(e, NotExists):
        return {field_of(e.term.var_name): {"$exists": False}}
    if isinstance(e, And):
        return {"$and": [translate_expression(e.left, field_of), translate_expression(e.right, field_of)]}
    if isinstance(e, Or):
        return {"$or": [translate_expression(e.left, field_of), translate_expression(e.right, field_of)]}
    if isinstance(e, Not):
        return {"$not": translate_expression(e.operand, field_of)}
    if isinstance(e, Compare):
        lhs, rhs, op = e.lhs, e.rhs, e.op
        if lhs.is_variable and not rhs.is_variable:
            return {field_of(lhs.var_name): {_OPS[op]: rhs.native}}
        if rhs.is_variable and not lhs.is_variable:
            return {field_of(rhs.var_name): {_OPS[_FLIPPED[op]]: lhs.native}}
        return {"$expr": {_OPS[op]: [_operand(lhs, field_of), _operand(rhs, field_of)]}}
    raise UnsupportedExpression(f"no pipeline form for {e!r}")


# -- pipeline emission --------------------------------------------------------------


def _condition(term: Term) -> Any:
    return {"$exists": True} if term.is_variable else term.native


def _assemble(conditions: list[tuple[str, Any]]) -> dict[str, Any]:
    """Build a match body; repeated keys are combined under ``$and``."""
    counts: dict[str, int] = {}
    for key, _ in conditions:
        counts[key] = counts.get(key, 0) + 1
    body: dict[str, Any] = {}
    conjuncts: list[dict[str, Any]] = []
    for key, cond in conditions:
        if counts[key] == 1:
            body[key] = cond
        elif {key: cond} not in conjuncts:
            conjuncts.append({key: cond})
    if len(conjuncts) == 1:
        body.update(conjuncts[0])
    elif conjuncts:
        body["$and"] = conjuncts
    return body


def _merge_into(body: dict[str, Any], fragment: dict[str, Any]) -> None:
    for key, cond in fragment.items():
        if key not in body:
            body[key] = cond
        elif key == "$and":
            body["$and"] = body["$and"] + cond
        else:
            existing = body.pop(key)
            body["$and"] = body.get("$and", []) + [{key: existing}, {key: cond}]


def translate_query(og: OperatorGraph, collection: str = "kg") -> MqlPipeline:
    # a chain's root match carries only the subject test; the lookups that
    # follow already require each bridging field to resolve
    keep_bridges = og.join_kind is not Shape.SUBJECT_OBJECT
    groups: dict[str, list[tuple[str, Any]]] = {"": [("subject_id", _condition(og.root))]}
    for step in og.pattern_chain:
        if step.role == LOOKUP_STEP and not keep_bridges:
            continue
        entry = (step.prefix + step.pattern.predicate.lexical, _condition(step.pattern.object))
        groups.setdefault(step.prefix, []).append(entry)

    stages = [MqlStage("match", _assemble(groups[""]))]
    for lookup in og.lookups:
        stages.append(MqlStage("lookup", {
            "from": collection,
            "localField": lookup.local_field,
            "foreignField": "subject_id",
            "as": lookup.alias,
        }))
        conditions = groups.get(lookup.alias + ".")
        if conditions:
            stages.append(MqlStage("match", _assemble(conditions)))

    final: dict[str, Any] = {}
    for var, paths in og.var_paths.items():
        for other in paths[1:]:
            if other != paths[0]:
                _merge_into(final, {"$expr": {"$eq": ["$" + paths[0], "$" + other]}})
    if og.conditions is not None:
        _merge_into(final, translate_expression(og.conditions, lambda v: _require_path(og, v)))
    if final:
        _merge_into(stages[-1].body if stages[-1].kind == "match" else _append_match(stages), final)

    mods = og.modifiers
    if mods.order_by is not None:
        path = _require_path(og, mods.order_by.variable)
        stages.append(MqlStage("sort", {path: -1 if mods.order_by.descending else 1}))
    if mods.offset is not None:
        stages.append(MqlStage("skip", mods.offset))
    if mods.limit is not None:
        stages.append(MqlStage("limit", mods.limit))
    stages.append(MqlStage("project", {v: "$" + _require_path(og, v) for v in og.projection}))
    return MqlPipeline(collection, tuple(stages))


def _append_match(stages: list[MqlStage]) -> dict[str, Any]:
    stage = MqlStage("match", {})
    stages.append(stage)
    return stage.body


def _require_path(og: OperatorGraph, var: str) -> str:
    path = og.path_of(var)
    if path is None:
        raise UntranslatableQuery(f"?{var} is not bound by any pattern")
    return path


def translate(ast: QueryAst, label: Optional[QueryLabel] = None, collection: str = "kg") -> MqlPipeline:
    """Operator graph plus emission in one call."""
    return translate_query(build_operator_graph(ast, label), collection)


def is_translatable(ast: QueryAst, label: Optional[QueryLabel] = None) -> bool:
    try:
        translate(ast, label)
    except UntranslatableQuery:
        return False
    return True

