"""Interpreter for the aggregation-pipeline stage vocabulary.

Rows are plain dicts: ``subject_id`` holds a string and every predicate
field holds a list of Terms.  Field tests are existential over arrays, so
``{"join_field.CUI": 2555}`` holds when any joined document has a CUI value
equal to 2555.  Values compare by match key and never across the
number/text divide.
"""

from __future__ import annotations

import itertools
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

from ..errors import EvalError, MissingProjection, UnknownCollection, UnknownStage
from ..model import Document, ResultSet, Term
from ..translate import MqlPipeline, MqlStage

Row = dict[str, Any]

_CMP_OPS = ("$eq", "$ne", "$gt", "$gte", "$lt", "$lte")


def document_row(doc: Document) -> Row:
    row: Row = {"subject_id": doc.subject_id}
    for pred, values in doc.fields.items():
        row[pred] = list(values)
    return row


def _key(value: Any) -> Optional[tuple]:
    if isinstance(value, Term):
        return value.key
    if isinstance(value, str):
        return ("s", value)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return ("n", value)
    return None


def _order_key(value: Any) -> tuple:
    if isinstance(value, Term):
        return value.order_key
    key = _key(value)
    if key is None:
        return (3,)
    return (1, key[1]) if key[0] == "n" else (2, key[1])


def resolve(value: Any, path: Union[str, Sequence[str]]) -> list[Any]:
    """Leaf values at a dotted path, flattening arrays on the way.

    Keys that themselves contain dots are matched greedily, longest first.
    """
    parts = path.split(".") if isinstance(path, str) else list(path)
    if isinstance(value, list):
        return [leaf for item in value for leaf in resolve(item, parts)]
    if not parts:
        return [value]
    if isinstance(value, dict):
        for n in range(len(parts), 0, -1):
            key = ".".join(parts[:n])
            if key in value:
                return resolve(value[key], parts[n:])
    return []


def _compare(op: str, a: Any, b: Any) -> bool:
    ka, kb = _key(a), _key(b)
    if op == "$eq":
        return ka is not None and ka == kb
    if op == "$ne":
        return ka != kb
    if ka is None or kb is None or ka[0] != kb[0]:
        return False
    x, y = ka[1], kb[1]
    if op == "$gt":
        return x > y
    if op == "$gte":
        return x >= y
    if op == "$lt":
        return x < y
    if op == "$lte":
        return x <= y
    raise EvalError(f"unknown comparison operator {op}")


def _is_operator_doc(cond: Any) -> bool:
    return isinstance(cond, dict) and bool(cond) and all(k.startswith("$") for k in cond)


def _field_matches(values: list[Any], cond: Any) -> bool:
    if not _is_operator_doc(cond):
        return any(_compare("$eq", v, cond) for v in values)
    for op, arg in cond.items():
        if op == "$exists":
            ok = bool(values) == bool(arg)
        elif op == "$ne":
            ok = not any(_compare("$eq", v, arg) for v in values)
        elif op in _CMP_OPS:
            ok = any(_compare(op, v, arg) for v in values)
        elif op == "$not":
            ok = not _field_matches(values, arg)
        elif op == "$in":
            ok = any(_compare("$eq", v, a) for v in values for a in arg)
        else:
            raise EvalError(f"unknown field operator {op}")
        if not ok:
            return False
    return True


def _expr_operand(row: Row, operand: Any) -> list[Any]:
    if isinstance(operand, str) and operand.startswith("$"):
        return resolve(row, operand[1:])
    if isinstance(operand, dict) and set(operand) == {"$literal"}:
        return [operand["$literal"]]
    return [operand]


def eval_expr(row: Row, expr: Any) -> bool:
    """Aggregation expression; comparisons hold for some pair of values."""
    if not isinstance(expr, dict) or len(expr) != 1:
        raise EvalError(f"malformed $expr {expr!r}")
    (op, args), = expr.items()
    if op == "$and":
        return all(eval_expr(row, a) for a in args)
    if op == "$or":
        return any(eval_expr(row, a) for a in args)
    if op == "$not":
        return not eval_expr(row, args[0] if isinstance(args, list) else args)
    if op in _CMP_OPS:
        left, right = (_expr_operand(row, a) for a in args)
        return any(_compare(op, x, y) for x in left for y in right)
    raise EvalError(f"unknown expression operator {op}")


def matches(row: Row, body: Mapping[str, Any]) -> bool:
    for key, cond in body.items():
        if key == "$and":
            ok = all(matches(row, c) for c in cond)
        elif key == "$or":
            ok = any(matches(row, c) for c in cond)
        elif key == "$nor":
            ok = not any(matches(row, c) for c in cond)
        elif key == "$not":
            ok = not matches(row, cond)
        elif key == "$expr":
            ok = eval_expr(row, cond)
        elif key.startswith("$"):
            raise EvalError(f"unknown top-level operator {key}")
        else:
            ok = _field_matches(resolve(row, key), cond)
        if not ok:
            return False
    return True


def _dedupe(values: Iterable[Any]) -> list[Any]:
    """Drop repeated values; a name and a string with the same text are distinct."""
    seen, out = set(), []
    for v in values:
        marker = v if isinstance(v, Term) else (type(v).__name__, v if _key(v) is not None else id(v))
        if marker not in seen:
            seen.add(marker)
            out.append(v)
    return out


class PipelineEngine:
    """Evaluates pipelines over named document collections."""

    def __init__(self, documents: Union[Iterable[Document], Mapping[str, Iterable[Document]]],
                 collection: str = "kg"):
        if isinstance(documents, Mapping):
            groups = documents
        else:
            groups = {collection: documents}
        self.collections: dict[str, list[Row]] = {
            name: [d if isinstance(d, dict) else document_row(d) for d in docs]
            for name, docs in groups.items()
        }
        self._indexes: dict[tuple[str, str], dict[tuple, list[tuple[int, Row]]]] = {}

    def _collection(self, name: str) -> list[Row]:
        try:
            return self.collections[name]
        except KeyError:
            raise UnknownCollection(f"no collection named {name!r}") from None

    def _index(self, name: str, field: str) -> dict[tuple, list[tuple[int, Row]]]:
        cache_key = (name, field)
        if cache_key not in self._indexes:
            index: dict[tuple, list[tuple[int, Row]]] = {}
            for pos, doc in enumerate(self._collection(name)):
                for k in {_key(v) for v in resolve(doc, field)} - {None}:
                    index.setdefault(k, []).append((pos, doc))
            self._indexes[cache_key] = index
        return self._indexes[cache_key]

    def aggregate(self, pipeline: Union[MqlPipeline, list]) -> list[Row]:
        if isinstance(pipeline, list):
            pipeline = MqlPipeline.from_list(pipeline)
        rows = list(self._collection(pipeline.collection))
        for stage in pipeline.stages:
            rows = self._apply(stage, rows)
        return rows

    def _apply(self, stage: MqlStage, rows: list[Row]) -> list[Row]:
        kind, body = stage.kind, stage.body
        if kind == "match":
            return [r for r in rows if matches(r, body)]
        if kind == "lookup":
            index = self._index(body["from"], body["foreignField"])
            out = []
            for r in rows:
                joined: dict[int, Row] = {}
                for k in {_key(v) for v in resolve(r, body["localField"])} - {None}:
                    joined.update(index.get(k, ()))
                out.append({**r, body["as"]: [joined[pos] for pos in sorted(joined)]})
            return out
        if kind == "sort":
            rows = list(rows)
            for path, direction in reversed(list(body.items())):
                desc = direction == -1
                pick = max if desc else min

                def sort_key(r: Row, path=path, pick=pick) -> tuple:
                    values = resolve(r, path)
                    return pick(_order_key(v) for v in values) if values else (0,)
                rows.sort(key=sort_key, reverse=desc)
            return rows
        if kind == "skip":
            return rows[int(body):]
        if kind == "limit":
            return rows[:int(body)]
        if kind == "project":
            out = []
            for r in rows:
                projected: Row = {}
                for name, spec in body.items():
                    if isinstance(spec, str) and spec.startswith("$"):
                        projected[name] = _dedupe(resolve(r, spec[1:]))
                    elif spec in (1, True):
                        if name in r:
                            projected[name] = r[name]
                    else:
                        raise EvalError(f"unsupported projection {name}: {spec!r}")
                out.append(projected)
            return out
        raise UnknownStage(f"unknown stage ${kind}")

    def execute(self, pipeline: Union[MqlPipeline, list]) -> ResultSet:
        """Run a pipeline and expand its projected rows into bindings."""
        if isinstance(pipeline, list):
            pipeline = MqlPipeline.from_list(pipeline)
        ordered = any(s.kind == "sort" for s in pipeline.stages)
        return bindings_from_rows(self.aggregate(pipeline), pipeline.projection(), ordered)


def eval_pipeline(docs: Iterable[Document], pipeline: Union[MqlPipeline, list]) -> list[Row]:
    if isinstance(pipeline, list):
        pipeline = MqlPipeline.from_list(pipeline)
    return PipelineEngine(docs, pipeline.collection).aggregate(pipeline)


def _as_term(value: Any) -> Term:
    if isinstance(value, Term):
        return value
    if isinstance(value, str):
        return Term.name(value)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return Term.number(value)
    raise EvalError(f"cannot bind a {type(value).__name__} value")


def bindings_from_rows(rows: Iterable[Row], projection: Sequence[str], ordered: bool = False) -> ResultSet:
    """One binding per combination of projected values in each row."""
    variables = list(projection)
    out = []
    for row in rows:
        columns = []
        for var in variables:
            if var not in row:
                raise MissingProjection(f"row has no projected field {var!r}")
            value = row[var]
            columns.append([_as_term(v) for v in (value if isinstance(value, list) else [value])])
        for combo in itertools.product(*columns):
            out.append(dict(zip(variables, combo)))
    return ResultSet(variables, out, ordered)
